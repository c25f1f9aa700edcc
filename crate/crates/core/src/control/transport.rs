use std::collections::BTreeMap;
use std::io;
use std::net::{SocketAddr, UdpSocket};

/// Datagram link between the server and its bots.
pub trait Transport {
    fn send(&mut self, to: u8, datagram: &[u8]) -> io::Result<()>;
    /// Next pending datagram, or `None` when nothing is waiting.
    fn recv(&mut self) -> io::Result<Option<Vec<u8>>>;
}

/// Non-blocking UDP socket with a fixed bot id → address table.
#[derive(Debug)]
pub struct UdpTransport {
    socket: UdpSocket,
    peers: BTreeMap<u8, SocketAddr>,
    buffer: Vec<u8>,
}

impl UdpTransport {
    pub fn bind(addr: SocketAddr, peers: BTreeMap<u8, SocketAddr>) -> io::Result<Self> {
        let socket = UdpSocket::bind(addr)?;
        socket.set_nonblocking(true)?;
        Ok(Self { socket, peers, buffer: vec![0; 2048] })
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.socket.local_addr()
    }

    pub fn add_peer(&mut self, id: u8, addr: SocketAddr) {
        self.peers.insert(id, addr);
    }
}

impl Transport for UdpTransport {
    fn send(&mut self, to: u8, datagram: &[u8]) -> io::Result<()> {
        let addr = self
            .peers
            .get(&to)
            .ok_or_else(|| io::Error::new(io::ErrorKind::NotFound, format!("no address for bot {to}")))?;
        self.socket.send_to(datagram, addr).map(|_| ())
    }

    fn recv(&mut self) -> io::Result<Option<Vec<u8>>> {
        match self.socket.recv_from(&mut self.buffer) {
            Ok((n, _)) => Ok(Some(self.buffer[..n].to_vec())),
            Err(e) if e.kind() == io::ErrorKind::WouldBlock => Ok(None),
            Err(e) => Err(e),
        }
    }
}

#[cfg(test)]
mod tests {
    use std::time::{Duration, Instant};

    use super::*;

    #[test]
    fn loopback_round_trip() {
        let any: SocketAddr = "127.0.0.1:0".parse().unwrap();
        let mut a = UdpTransport::bind(any, BTreeMap::new()).unwrap();
        let mut b = UdpTransport::bind(any, BTreeMap::new()).unwrap();
        a.add_peer(7, b.local_addr().unwrap());
        assert!(a.send(8, b"x").is_err());
        a.send(7, &[0x41, 0x42, 1]).unwrap();
        let deadline = Instant::now() + Duration::from_secs(2);
        let got = loop {
            if let Some(d) = b.recv().unwrap() {
                break d;
            }
            assert!(Instant::now() < deadline, "datagram never arrived");
            std::thread::sleep(Duration::from_millis(1));
        };
        assert_eq!(got, vec![0x41, 0x42, 1]);
        assert_eq!(b.recv().unwrap(), None);
    }
}
