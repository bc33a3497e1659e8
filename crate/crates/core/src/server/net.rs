//! WebSocket transport: one thread per connection, each owning one session.

use std::io::{self, ErrorKind};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use tungstenite::{Error as WsError, Message, WebSocket};

use super::protocol::{encode_event, ErrorCode, Event};
use super::session::{Catalog, Session};

/// How often the accept loop checks the stop flag.
const ACCEPT_POLL: Duration = Duration::from_millis(50);
/// Read timeout while paused, so a stopping server notices promptly.
const IDLE_POLL: Duration = Duration::from_millis(200);

pub struct Server {
    listener: TcpListener,
    catalog: Arc<Catalog>,
    stop: Arc<AtomicBool>,
    sessions: AtomicU64,
}

impl Server {
    pub fn bind(addr: impl std::net::ToSocketAddrs, catalog: Catalog) -> io::Result<Self> {
        let listener = TcpListener::bind(addr)?;
        listener.set_nonblocking(true)?;
        Ok(Server {
            listener,
            catalog: Arc::new(catalog),
            stop: Arc::new(AtomicBool::new(false)),
            sessions: AtomicU64::new(0),
        })
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    /// Setting this flag makes [`Server::run`] return and open connections close.
    pub fn stop_flag(&self) -> Arc<AtomicBool> {
        self.stop.clone()
    }

    /// Accepts connections until the stop flag is set.
    pub fn run(&self) -> io::Result<()> {
        log::info!("listening on {}", self.local_addr()?);
        let mut workers = Vec::new();
        while !self.stop.load(Ordering::Relaxed) {
            match self.listener.accept() {
                Ok((stream, peer)) => {
                    let id = format!("s{}", self.sessions.fetch_add(1, Ordering::Relaxed) + 1);
                    let catalog = self.catalog.clone();
                    let stop = self.stop.clone();
                    workers.push(thread::spawn(move || {
                        log::info!("session {id}: connected from {peer}");
                        match serve_connection(stream, Session::new(id.clone(), catalog), &stop) {
                            Ok(()) => log::info!("session {id}: closed"),
                            Err(e) => log::warn!("session {id}: {e}"),
                        }
                    }));
                    workers.retain(|w| !w.is_finished());
                }
                Err(e) if e.kind() == ErrorKind::WouldBlock => thread::sleep(ACCEPT_POLL),
                Err(e) => return Err(e),
            }
        }
        for w in workers {
            let _ = w.join();
        }
        log::info!("server stopped");
        Ok(())
    }
}

fn is_timeout(e: &WsError) -> bool {
    matches!(e, WsError::Io(io) if matches!(io.kind(), ErrorKind::WouldBlock | ErrorKind::TimedOut))
}

fn send_all(ws: &mut WebSocket<TcpStream>, frames: impl IntoIterator<Item = String>) -> Result<(), WsError> {
    for f in frames {
        ws.write(Message::text(f))?;
    }
    ws.flush()
}

/// Runs one session over an accepted TCP stream until the peer closes.
pub fn serve_connection(stream: TcpStream, mut session: Session, stop: &AtomicBool) -> Result<(), WsError> {
    stream.set_nonblocking(false)?;
    stream.set_nodelay(true)?;
    let mut ws = tungstenite::accept(stream).map_err(|e| match e {
        tungstenite::HandshakeError::Failure(e) => e,
        tungstenite::HandshakeError::Interrupted(_) => WsError::Io(ErrorKind::WouldBlock.into()),
    })?;
    loop {
        if stop.load(Ordering::Relaxed) {
            let _ = ws.close(None);
            let _ = ws.flush();
            return Ok(());
        }
        let wait = session
            .next_due()
            .map(|due| due.saturating_duration_since(Instant::now()).clamp(Duration::from_millis(1), IDLE_POLL))
            .unwrap_or(IDLE_POLL);
        ws.get_mut().set_read_timeout(Some(wait))?;
        match ws.read() {
            Ok(Message::Text(text)) => send_all(&mut ws, session.handle_text(&text))?,
            Ok(Message::Binary(_)) => {
                let ev = Event::error(ErrorCode::Malformed, "binary frames are not supported");
                send_all(&mut ws, [encode_event(&ev)])?;
            }
            Ok(_) => {}
            Err(e) if is_timeout(&e) => {}
            Err(WsError::ConnectionClosed | WsError::AlreadyClosed) => return Ok(()),
            Err(e) => return Err(e),
        }
        let events = session.poll_play(Instant::now());
        if !events.is_empty() {
            send_all(&mut ws, events.iter().map(encode_event))?;
        }
    }
}
