//! Pilot side of the robot link: one WebSocket, command letters down as
//! text frames, JPEG frames up as binary frames.
//!
//! A background thread owns the socket. It answers pings, keeps only the
//! newest frame, and writes queued commands.

use std::net::{SocketAddr, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicBool, AtomicU64, AtomicU8, Ordering};
use std::sync::mpsc::{self, Receiver, Sender};
use std::sync::{Arc, Condvar, Mutex};
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use sg_core::{Action, Observation};
use tungstenite::protocol::WebSocket;
use tungstenite::{HandshakeError, Message};

use crate::render::{frame_seq, is_jpeg};

/// Prefix of a text frame carrying a structured observation.
pub const OBS_PREFIX: &str = "#OBS ";

const POLL: Duration = Duration::from_millis(5);
const COMMAND_WAIT: Duration = Duration::from_secs(5);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LinkError {
    #[error("timed out: {0}")]
    Timeout(String),
    #[error("connection refused: {0}")]
    Refused(String),
    #[error("bad robot URL: {0}")]
    BadUrl(String),
    #[error("link is closed")]
    LinkClosed,
    #[error("transport: {0}")]
    Transport(String),
    #[error("frame of {len} bytes lacks JPEG SOI/EOI markers")]
    CorruptFrame { len: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkState {
    Connecting,
    Open,
    Closed,
}

/// One camera frame as received.
#[derive(Debug, Clone, PartialEq)]
pub struct JpegFrame {
    pub bytes: Vec<u8>,
    /// Milliseconds since the link was opened.
    pub received_at_ms: u64,
    pub seq: Option<u64>,
    /// The `#OBS` record that immediately preceded this frame, if any.
    pub observation: Option<Observation>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LinkStats {
    pub frames_received: u64,
    pub commands_sent: u64,
    pub protocol_violations: u64,
    pub last_heartbeat_ms: Option<u64>,
}

#[derive(Default)]
struct Slot {
    newest: Option<JpegFrame>,
    closed: bool,
}

struct Shared {
    slot: Mutex<Slot>,
    arrived: Condvar,
    state: AtomicU8,
    frames_received: AtomicU64,
    commands_sent: AtomicU64,
    violations: AtomicU64,
    // 0 means never; otherwise ms since open plus one.
    last_heartbeat: AtomicU64,
    paused: AtomicBool,
    stop: AtomicBool,
}

impl Shared {
    fn state(&self) -> LinkState {
        match self.state.load(Ordering::SeqCst) {
            0 => LinkState::Connecting,
            1 => LinkState::Open,
            _ => LinkState::Closed,
        }
    }

    fn close(&self) {
        self.state.store(2, Ordering::SeqCst);
        self.slot.lock().unwrap().closed = true;
        self.arrived.notify_all();
    }
}

type Reply = Sender<Result<(), LinkError>>;

/// An open link to a robot. Frames and commands may be used from two
/// threads at once.
pub struct LinkHandle {
    peer_url: String,
    shared: Arc<Shared>,
    commands: Mutex<Option<Sender<(Action, Reply)>>>,
    io: Mutex<Option<JoinHandle<()>>>,
}

fn handshake_error<R: tungstenite::handshake::HandshakeRole>(e: HandshakeError<R>) -> LinkError {
    match e {
        HandshakeError::Interrupted(_) => LinkError::Timeout("handshake".into()),
        HandshakeError::Failure(tungstenite::Error::Http(resp)) => {
            LinkError::Refused(format!("robot answered HTTP {}", resp.status()))
        }
        HandshakeError::Failure(tungstenite::Error::Io(io)) => io_error(io),
        HandshakeError::Failure(other) => LinkError::Transport(other.to_string()),
    }
}

fn io_error(e: std::io::Error) -> LinkError {
    use std::io::ErrorKind::*;
    match e.kind() {
        ConnectionRefused => LinkError::Refused(e.to_string()),
        TimedOut | WouldBlock => LinkError::Timeout(e.to_string()),
        ConnectionReset | ConnectionAborted | BrokenPipe | UnexpectedEof => {
            LinkError::Refused(format!("peer hung up during handshake: {e}"))
        }
        _ => LinkError::Transport(e.to_string()),
    }
}

fn resolve(url: &url::Url) -> Result<SocketAddr, LinkError> {
    let host = url
        .host_str()
        .ok_or_else(|| LinkError::BadUrl(format!("{url}: no host")))?;
    let port = url.port_or_known_default().unwrap_or(80);
    (host, port)
        .to_socket_addrs()
        .map_err(|e| LinkError::BadUrl(format!("{host}: {e}")))?
        .next()
        .ok_or_else(|| LinkError::BadUrl(format!("{host}: no address")))
}

impl LinkHandle {
    /// Opens a `ws://` link; the whole TCP and WebSocket handshake must
    /// finish within `timeout_ms`.
    pub fn connect(url: &str, timeout_ms: u64) -> Result<Self, LinkError> {
        let parsed =
            url::Url::parse(url).map_err(|e| LinkError::BadUrl(format!("{url:?}: {e}")))?;
        match parsed.scheme() {
            "ws" => {}
            "wss" => {
                return Err(LinkError::BadUrl(format!(
                    "{url}: wss:// is not supported by this build"
                )))
            }
            s => return Err(LinkError::BadUrl(format!("{url}: scheme {s:?} is not ws"))),
        }
        let deadline = Instant::now() + Duration::from_millis(timeout_ms.max(1));
        let addr = resolve(&parsed)?;
        let left = || {
            deadline
                .saturating_duration_since(Instant::now())
                .max(Duration::from_millis(1))
        };
        let stream = TcpStream::connect_timeout(&addr, left()).map_err(io_error)?;
        stream.set_nodelay(true).ok();
        stream.set_read_timeout(Some(left())).map_err(io_error)?;
        stream.set_write_timeout(Some(left())).map_err(io_error)?;
        let (ws, _resp) = tungstenite::client(parsed.as_str(), stream).map_err(handshake_error)?;
        ws.get_ref()
            .set_read_timeout(Some(POLL))
            .map_err(io_error)?;
        ws.get_ref()
            .set_write_timeout(Some(COMMAND_WAIT))
            .map_err(io_error)?;

        let shared = Arc::new(Shared {
            slot: Mutex::new(Slot::default()),
            arrived: Condvar::new(),
            state: AtomicU8::new(1),
            frames_received: AtomicU64::new(0),
            commands_sent: AtomicU64::new(0),
            violations: AtomicU64::new(0),
            last_heartbeat: AtomicU64::new(0),
            paused: AtomicBool::new(false),
            stop: AtomicBool::new(false),
        });
        let (tx, rx) = mpsc::channel();
        let io_shared = Arc::clone(&shared);
        let io = std::thread::Builder::new()
            .name("sg-link".into())
            .spawn(move || io_loop(ws, io_shared, rx))
            .map_err(|e| LinkError::Transport(e.to_string()))?;
        log::info!("link open to {url}");
        Ok(Self {
            peer_url: url.to_string(),
            shared,
            commands: Mutex::new(Some(tx)),
            io: Mutex::new(Some(io)),
        })
    }

    pub fn peer_url(&self) -> &str {
        &self.peer_url
    }

    pub fn state(&self) -> LinkState {
        self.shared.state()
    }

    pub fn stats(&self) -> LinkStats {
        let hb = self.shared.last_heartbeat.load(Ordering::SeqCst);
        LinkStats {
            frames_received: self.shared.frames_received.load(Ordering::SeqCst),
            commands_sent: self.shared.commands_sent.load(Ordering::SeqCst),
            protocol_violations: self.shared.violations.load(Ordering::SeqCst),
            last_heartbeat_ms: hb.checked_sub(1),
        }
    }

    /// Sends the action's letter as a one-byte text frame and waits until
    /// it has been written to the socket.
    pub fn send_command(&self, action: Action) -> Result<(), LinkError> {
        if self.state() != LinkState::Open {
            return Err(LinkError::LinkClosed);
        }
        let (reply_tx, reply_rx) = mpsc::channel();
        {
            let guard = self.commands.lock().unwrap();
            let tx = guard.as_ref().ok_or(LinkError::LinkClosed)?;
            tx.send((action, reply_tx))
                .map_err(|_| LinkError::LinkClosed)?;
        }
        match reply_rx.recv_timeout(COMMAND_WAIT) {
            Ok(r) => r,
            Err(mpsc::RecvTimeoutError::Timeout) => Err(LinkError::Timeout("command write".into())),
            Err(mpsc::RecvTimeoutError::Disconnected) => Err(LinkError::LinkClosed),
        }
    }

    /// The newest frame that arrived since the last call, waiting up to
    /// `timeout_ms` for one. Older buffered frames are dropped.
    pub fn next_frame(&self, timeout_ms: u64) -> Result<JpegFrame, LinkError> {
        let deadline = Instant::now() + Duration::from_millis(timeout_ms);
        let mut slot = self.shared.slot.lock().unwrap();
        loop {
            if let Some(f) = slot.newest.take() {
                if !is_jpeg(&f.bytes) {
                    return Err(LinkError::CorruptFrame { len: f.bytes.len() });
                }
                return Ok(f);
            }
            if slot.closed {
                return Err(LinkError::LinkClosed);
            }
            let now = Instant::now();
            if now >= deadline {
                return Err(LinkError::Timeout(format!(
                    "no frame within {timeout_ms} ms"
                )));
            }
            slot = self
                .shared
                .arrived
                .wait_timeout(slot, deadline - now)
                .unwrap()
                .0;
        }
    }

    /// Stops servicing the socket without closing it: no reads, no pongs,
    /// no writes. Stands in for a hung pilot.
    pub fn set_paused(&self, paused: bool) {
        self.shared.paused.store(paused, Ordering::SeqCst);
    }

    pub fn close(&self) {
        self.shared.stop.store(true, Ordering::SeqCst);
        self.commands.lock().unwrap().take();
        if let Some(io) = self.io.lock().unwrap().take() {
            let _ = io.join();
        }
        self.shared.close();
    }
}

impl Drop for LinkHandle {
    fn drop(&mut self) {
        self.close();
    }
}

fn io_loop(mut ws: WebSocket<TcpStream>, shared: Arc<Shared>, commands: Receiver<(Action, Reply)>) {
    let opened = Instant::now();
    let ms = || opened.elapsed().as_millis() as u64;
    let mut pending_obs: Option<Observation> = None;
    let reason = loop {
        if shared.stop.load(Ordering::SeqCst) {
            let _ = ws.close(None);
            let _ = ws.flush();
            break "closed by pilot".to_string();
        }
        if shared.paused.load(Ordering::SeqCst) {
            std::thread::sleep(POLL);
            continue;
        }
        while let Ok((action, reply)) = commands.try_recv() {
            let r = ws
                .send(Message::text(action.as_str()))
                .map_err(|e| LinkError::Transport(e.to_string()));
            if r.is_ok() {
                shared.commands_sent.fetch_add(1, Ordering::SeqCst);
            }
            let _ = reply.send(r);
        }
        match ws.read() {
            Ok(Message::Binary(bytes)) => {
                let frame = JpegFrame {
                    seq: frame_seq(&bytes),
                    bytes: bytes.to_vec(),
                    received_at_ms: ms(),
                    observation: pending_obs.take(),
                };
                shared.frames_received.fetch_add(1, Ordering::SeqCst);
                shared.slot.lock().unwrap().newest = Some(frame);
                shared.arrived.notify_all();
            }
            Ok(Message::Text(t)) => match t
                .as_str()
                .strip_prefix(OBS_PREFIX)
                .map(serde_json::from_str)
            {
                Some(Ok(obs)) => pending_obs = Some(obs),
                _ => {
                    shared.violations.fetch_add(1, Ordering::SeqCst);
                    log::warn!("unexpected text frame from robot ({} bytes)", t.len());
                }
            },
            Ok(Message::Ping(_)) => {
                shared.last_heartbeat.store(ms() + 1, Ordering::SeqCst);
                // The pong is queued by the read; push it out now.
                let _ = ws.flush();
            }
            Ok(Message::Close(_)) => break "robot closed the link".to_string(),
            Ok(_) => {}
            Err(tungstenite::Error::Io(e))
                if matches!(
                    e.kind(),
                    std::io::ErrorKind::WouldBlock | std::io::ErrorKind::TimedOut
                ) => {}
            Err(e) => break e.to_string(),
        }
    };
    log::info!("link closed: {reason}");
    shared.close();
    // Fail any command that raced the shutdown.
    while let Ok((_, reply)) = commands.try_recv() {
        let _ = reply.send(Err(LinkError::LinkClosed));
    }
}
