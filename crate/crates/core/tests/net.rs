//! The session protocol over real WebSocket connections.

mod common;

use std::net::{SocketAddr, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use steppe::server::{decode_event, Catalog, Event, Server};
use tungstenite::stream::MaybeTlsStream;
use tungstenite::{Message, WebSocket};

type Client = WebSocket<MaybeTlsStream<TcpStream>>;

struct Running {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    handle: JoinHandle<std::io::Result<()>>,
}

impl Running {
    fn start() -> Self {
        let server = Server::bind("127.0.0.1:0", Catalog::builtin()).unwrap();
        let addr = server.local_addr().unwrap();
        let stop = server.stop_flag();
        let handle = thread::spawn(move || server.run());
        Running { addr, stop, handle }
    }

    fn connect(&self) -> Client {
        let (ws, _) = tungstenite::connect(format!("ws://{}", self.addr)).unwrap();
        ws
    }

    fn shutdown(self) {
        self.stop.store(true, Ordering::Relaxed);
        self.handle.join().unwrap().unwrap();
    }
}

fn set_timeout(ws: &mut Client, t: Duration) {
    if let MaybeTlsStream::Plain(s) = ws.get_mut() {
        s.set_read_timeout(Some(t)).unwrap();
    }
}

fn next_event(ws: &mut Client) -> Option<Event> {
    match ws.read() {
        Ok(Message::Text(t)) => Some(decode_event(&t).unwrap()),
        Ok(_) => None,
        Err(tungstenite::Error::Io(e)) if matches!(e.kind(), std::io::ErrorKind::WouldBlock | std::io::ErrorKind::TimedOut) => None,
        Err(e) => panic!("read failed: {e}"),
    }
}

fn send(ws: &mut Client, frame: &str) {
    ws.send(Message::text(frame)).unwrap();
}

fn read_n(ws: &mut Client, n: usize) -> Vec<Event> {
    let mut out = Vec::new();
    while out.len() < n {
        if let Some(e) = next_event(ws) {
            out.push(e);
        }
    }
    out
}

#[test]
fn play_at_ten_tps_for_one_second() {
    let srv = Running::start();
    let mut ws = srv.connect();
    send(&mut ws, r#"{"type":"load","model":"gol","params":{"width":8,"height":8,"density":0.3},"seed":2}"#);
    read_n(&mut ws, 3);
    set_timeout(&mut ws, Duration::from_millis(20));
    send(&mut ws, r#"{"type":"play","tps":10}"#);
    let started = Instant::now();
    let mut ticks = 0;
    let mut acked = false;
    while started.elapsed() < Duration::from_secs(1) {
        match next_event(&mut ws) {
            Some(Event::Ack { of }) if of == "play" => acked = true,
            Some(Event::Tick { .. }) => ticks += 1,
            Some(other) => panic!("unexpected {other:?}"),
            None => {}
        }
    }
    send(&mut ws, r#"{"type":"pause"}"#);
    let last = loop {
        if let Some(Event::Timeline { current, .. }) = next_event(&mut ws) {
            break current;
        }
    };
    assert!(acked);
    assert!((7..=13).contains(&ticks), "{ticks} ticks in one second at 10 tps");
    assert!(last >= ticks);
    srv.shutdown();
}

#[test]
fn concurrent_sessions_do_not_interfere() {
    let srv = Running::start();
    let addr = srv.addr;
    let workers: Vec<_> = (0..3)
        .map(|_| {
            thread::spawn(move || {
                let (mut ws, _) = tungstenite::connect(format!("ws://{addr}")).unwrap();
                let expected = common::transcript_groups("pastoral");
                let mut got = Vec::new();
                for (frame, want) in common::script("pastoral").into_iter().zip(&expected) {
                    ws.send(Message::text(frame)).unwrap();
                    let mut n = 0;
                    while n < want.len() {
                        if let Message::Text(t) = ws.read().unwrap() {
                            got.push(t.to_string());
                            n += 1;
                        }
                    }
                }
                (got, expected.into_iter().flatten().collect::<Vec<_>>())
            })
        })
        .collect();
    for w in workers {
        let (got, expected) = w.join().unwrap();
        assert_eq!(got, expected);
    }
    srv.shutdown();
}

#[test]
fn binary_frames_are_malformed() {
    let srv = Running::start();
    let mut ws = srv.connect();
    ws.send(Message::binary(vec![1u8, 2, 3])).unwrap();
    match read_n(&mut ws, 1).pop().unwrap() {
        Event::Error { code, .. } => assert_eq!(code.as_str(), "E_MALFORMED"),
        other => panic!("unexpected {other:?}"),
    }
    srv.shutdown();
}

#[test]
fn stopping_the_server_closes_connections() {
    let srv = Running::start();
    let mut ws = srv.connect();
    send(&mut ws, r#"{"type":"pause"}"#);
    assert!(matches!(read_n(&mut ws, 1)[0], Event::Error { .. }));
    srv.shutdown();
    let closed = loop {
        match ws.read() {
            Ok(Message::Close(_)) => continue,
            Ok(_) => continue,
            Err(_) => break true,
        }
    };
    assert!(closed);
}
