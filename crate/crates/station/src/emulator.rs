//! A stand-in robot: serves the link protocol from a seeded simulator.
//!
//! One loop does everything: accepts the single pilot, applies command
//! letters to the latched action, steps physics in wall-clock time,
//! publishes frames and runs the heartbeat.

use std::io::{Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::Serialize;
use sg_core::sim::{Environment, SimConfig, SimError, World};
use sg_core::{Action, FlightRecord};
use tungstenite::protocol::WebSocket;
use tungstenite::Message;

use crate::link::OBS_PREFIX;
use crate::render::{encode_jpeg, render_view};

pub const TRUTH_PERSONA: &str = "emulator";

#[derive(Debug, Clone)]
pub struct EmulatorConfig {
    pub listen: String,
    pub env: Environment,
    pub sim: SimConfig,
    pub fps: f64,
    pub width: u32,
    pub height: u32,
    pub jpeg_quality: u8,
    pub heartbeat: Duration,
    /// Missed pongs after which the pilot is declared lost.
    pub missed_pongs: u32,
    /// Send an `#OBS` record before every frame.
    pub observations: bool,
    /// Return after the first pilot goes away.
    pub once: bool,
}

impl EmulatorConfig {
    pub fn new(listen: impl Into<String>, env: Environment, sim: SimConfig) -> Self {
        Self {
            listen: listen.into(),
            env,
            sim,
            fps: 5.0,
            width: 640,
            height: 480,
            jpeg_quality: 80,
            heartbeat: Duration::from_secs(5),
            missed_pongs: 2,
            observations: true,
            once: false,
        }
    }

    /// Silence after which the pilot is lost: the missed pongs plus half an
    /// interval of grace for the last one in flight.
    pub fn dead_after(&self) -> Duration {
        self.heartbeat * self.missed_pongs + self.heartbeat / 2
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EmulatorError {
    #[error("cannot listen on {addr}: {source}")]
    Bind {
        addr: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("bad emulator setting: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopCause {
    HeartbeatLost,
    Disconnected,
    ProtocolViolation,
    Shutdown,
}

impl StopCause {
    fn reason(self) -> &'static str {
        match self {
            StopCause::HeartbeatLost => "forced stop: heartbeat lost",
            StopCause::Disconnected => "forced stop: pilot disconnected",
            StopCause::ProtocolViolation => "forced stop: protocol violation",
            StopCause::Shutdown => "forced stop: shutdown",
        }
    }
}

/// Things worth telling an operator about.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum EmulatorEvent {
    Listening { addr: String },
    ClientConnected { peer: String },
    ClientRefused { peer: String },
    Command { letter: char, t_ms: u64 },
    Ignored { letter: char },
    Violation { detail: String },
    ForcedStop { cause: StopCause, t_ms: u64 },
    ClientGone { cause: StopCause },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct EmulatorStats {
    pub commands_applied: u64,
    pub commands_ignored: u64,
    pub protocol_violations: u64,
    pub frames_sent: u64,
    pub frames_skipped: u64,
    pub clients_served: u64,
    pub clients_refused: u64,
    pub forced_stops: u64,
    pub heartbeat_losses: u64,
    pub collisions: u64,
    pub sim_time_ms: u64,
}

struct Client {
    ws: WebSocket<TcpStream>,
    peer: SocketAddr,
    last_pong: Instant,
    next_ping: Instant,
    ping_count: u64,
    congested: bool,
}

pub struct Emulator {
    cfg: EmulatorConfig,
    listener: TcpListener,
    world: World,
    stats: EmulatorStats,
    truth: Vec<FlightRecord>,
    collided_since_record: bool,
    shutdown: Arc<AtomicBool>,
    seq: u64,
}

impl Emulator {
    pub fn bind(cfg: EmulatorConfig) -> Result<Self, EmulatorError> {
        if !(cfg.fps > 0.0 && cfg.fps.is_finite()) {
            return Err(EmulatorError::Config(format!(
                "fps must be positive, got {}",
                cfg.fps
            )));
        }
        if cfg.width == 0 || cfg.height == 0 || cfg.heartbeat.is_zero() || cfg.missed_pongs == 0 {
            return Err(EmulatorError::Config(
                "resolution, heartbeat and missed pongs must be positive".into(),
            ));
        }
        let world = World::new(cfg.env.clone(), cfg.sim)?;
        let listener = TcpListener::bind(&cfg.listen).map_err(|source| EmulatorError::Bind {
            addr: cfg.listen.clone(),
            source,
        })?;
        listener
            .set_nonblocking(true)
            .map_err(|source| EmulatorError::Bind {
                addr: cfg.listen.clone(),
                source,
            })?;
        Ok(Self {
            cfg,
            listener,
            world,
            stats: EmulatorStats::default(),
            truth: Vec::new(),
            collided_since_record: false,
            shutdown: Arc::new(AtomicBool::new(false)),
            seq: 0,
        })
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.listener.local_addr().expect("bound listener")
    }

    /// Setting this flag ends [`Emulator::run`] after a forced Stop.
    pub fn shutdown_flag(&self) -> Arc<AtomicBool> {
        Arc::clone(&self.shutdown)
    }

    pub fn world(&self) -> &World {
        &self.world
    }

    pub fn stats(&self) -> &EmulatorStats {
        &self.stats
    }

    /// Applied commands and forced stops with the true pose at each.
    pub fn truth(&self) -> &[FlightRecord] {
        &self.truth
    }

    fn note(&mut self, action: Action, reason: &str) {
        self.world.set_action(action);
        let record = FlightRecord {
            t_ms: self.world.time_ms(),
            persona_id: TRUTH_PERSONA.into(),
            action,
            reason: reason.into(),
            latency_ms: 0,
            pose: Some(self.world.state().pose()),
            human_visible: self.world.observe().human_visible(),
            collision: self.collided_since_record,
        };
        self.collided_since_record = false;
        self.truth.push(record);
    }

    fn force_stop(&mut self, cause: StopCause, on_event: &mut impl FnMut(&EmulatorEvent)) {
        self.stats.forced_stops += 1;
        self.note(Action::Stop, cause.reason());
        on_event(&EmulatorEvent::ForcedStop {
            cause,
            t_ms: self.world.time_ms(),
        });
    }

    fn refuse(
        &mut self,
        mut stream: TcpStream,
        peer: SocketAddr,
        on_event: &mut impl FnMut(&EmulatorEvent),
    ) {
        // Read the upgrade request first so the 503 is not lost to a reset.
        stream.set_nonblocking(false).ok();
        stream
            .set_read_timeout(Some(Duration::from_millis(200)))
            .ok();
        let mut buf = [0u8; 4096];
        let mut got = Vec::new();
        while !got.windows(4).any(|w| w == b"\r\n\r\n") && got.len() < 16 * 1024 {
            match stream.read(&mut buf) {
                Ok(0) | Err(_) => break,
                Ok(n) => got.extend_from_slice(&buf[..n]),
            }
        }
        let _ = stream.write_all(
            b"HTTP/1.1 503 Service Unavailable\r\nContent-Length: 25\r\nConnection: close\r\n\r\nanother pilot holds link\n",
        );
        self.stats.clients_refused += 1;
        on_event(&EmulatorEvent::ClientRefused {
            peer: peer.to_string(),
        });
    }

    fn accept(&mut self, stream: TcpStream, peer: SocketAddr) -> Option<Client> {
        stream.set_nonblocking(false).ok()?;
        stream.set_read_timeout(Some(Duration::from_secs(2))).ok()?;
        stream.set_nodelay(true).ok();
        let ws = match tungstenite::accept(stream) {
            Ok(ws) => ws,
            Err(e) => {
                log::warn!("handshake with {peer} failed: {e}");
                return None;
            }
        };
        ws.get_ref().set_nonblocking(true).ok()?;
        let now = Instant::now();
        Some(Client {
            ws,
            peer,
            last_pong: now,
            next_ping: now + self.cfg.heartbeat,
            ping_count: 0,
            congested: false,
        })
    }

    /// Serves until the shutdown flag is set, or with `once` until the
    /// first pilot is gone. The latched action is Stop whenever no pilot
    /// holds the link.
    pub fn run(&mut self, mut on_event: impl FnMut(&EmulatorEvent)) -> EmulatorStats {
        on_event(&EmulatorEvent::Listening {
            addr: self.local_addr().to_string(),
        });
        let frame_every = Duration::from_secs_f64(1.0 / self.cfg.fps);
        let mut client: Option<Client> = None;
        let mut last_tick = Instant::now();
        let mut next_frame = Instant::now();
        let mut carry_us: u64 = 0;
        loop {
            if self.shutdown.load(Ordering::SeqCst) {
                if let Some(mut c) = client.take() {
                    let _ = c.ws.close(None);
                    let _ = c.ws.flush();
                }
                self.force_stop(StopCause::Shutdown, &mut on_event);
                break;
            }

            match self.listener.accept() {
                Ok((stream, peer)) => {
                    if client.is_some() {
                        self.refuse(stream, peer, &mut on_event);
                    } else if let Some(c) = self.accept(stream, peer) {
                        self.stats.clients_served += 1;
                        on_event(&EmulatorEvent::ClientConnected {
                            peer: peer.to_string(),
                        });
                        next_frame = Instant::now();
                        client = Some(c);
                    }
                }
                Err(e) if e.kind() == std::io::ErrorKind::WouldBlock => {}
                Err(e) => log::warn!("accept failed: {e}"),
            }

            // Physics in wall-clock time, carrying sub-millisecond remainders.
            let now = Instant::now();
            carry_us += now.duration_since(last_tick).as_micros() as u64;
            last_tick = now;
            let ms = carry_us / 1000;
            carry_us %= 1000;
            if ms > 0 && self.world.advance(ms) {
                self.collided_since_record = true;
            }

            let mut gone: Option<StopCause> = None;
            if let Some(c) = client.as_mut() {
                gone = self.service(c, &mut on_event);
                if gone.is_none() && Instant::now() >= next_frame {
                    next_frame += frame_every;
                    if next_frame < Instant::now() {
                        next_frame = Instant::now() + frame_every;
                    }
                    gone = self.publish(c);
                }
                if gone.is_none() {
                    gone = self.heartbeat(c);
                }
            }
            if let Some(cause) = gone {
                let mut c = client.take().expect("client present");
                let _ = c.ws.close(None);
                let _ = c.ws.flush();
                if cause == StopCause::HeartbeatLost {
                    self.stats.heartbeat_losses += 1;
                }
                log::info!("pilot {} gone: {:?}", c.peer, cause);
                self.force_stop(cause, &mut on_event);
                on_event(&EmulatorEvent::ClientGone { cause });
                if self.cfg.once {
                    break;
                }
            }
            std::thread::sleep(Duration::from_millis(1));
        }
        self.stats.collisions = self.world.collisions();
        self.stats.sim_time_ms = self.world.time_ms();
        self.stats.clone()
    }

    /// Drains everything the pilot sent.
    fn service(
        &mut self,
        c: &mut Client,
        on_event: &mut impl FnMut(&EmulatorEvent),
    ) -> Option<StopCause> {
        loop {
            match c.ws.read() {
                Ok(Message::Text(t)) => {
                    let mut chars = t.as_str().chars();
                    match (chars.next(), chars.next()) {
                        (Some(letter), None) if t.len() == 1 => match Action::from_letter(letter) {
                            Ok(action) => {
                                self.stats.commands_applied += 1;
                                self.note(action, "command");
                                on_event(&EmulatorEvent::Command {
                                    letter,
                                    t_ms: self.world.time_ms(),
                                });
                            }
                            Err(_) => {
                                self.stats.commands_ignored += 1;
                                on_event(&EmulatorEvent::Ignored { letter });
                            }
                        },
                        _ => {
                            self.stats.protocol_violations += 1;
                            on_event(&EmulatorEvent::Violation {
                                detail: format!("text frame of {} bytes", t.len()),
                            });
                        }
                    }
                }
                Ok(Message::Binary(b)) => {
                    self.stats.protocol_violations += 1;
                    on_event(&EmulatorEvent::Violation {
                        detail: format!("binary frame of {} bytes from pilot", b.len()),
                    });
                    return Some(StopCause::ProtocolViolation);
                }
                Ok(Message::Pong(_)) => c.last_pong = Instant::now(),
                Ok(Message::Close(_)) => return Some(StopCause::Disconnected),
                Ok(_) => {}
                Err(tungstenite::Error::Io(e)) if e.kind() == std::io::ErrorKind::WouldBlock => {
                    return None
                }
                Err(_) => return Some(StopCause::Disconnected),
            }
        }
    }

    fn send(c: &mut Client, msg: Message) -> Result<(), StopCause> {
        match c.ws.write(msg) {
            Ok(()) => {}
            Err(tungstenite::Error::Io(e)) if e.kind() == std::io::ErrorKind::WouldBlock => {}
            Err(tungstenite::Error::WriteBufferFull(_)) => {
                c.congested = true;
                return Ok(());
            }
            Err(_) => return Err(StopCause::Disconnected),
        }
        Self::flush(c)
    }

    fn flush(c: &mut Client) -> Result<(), StopCause> {
        match c.ws.flush() {
            Ok(()) => {
                c.congested = false;
                Ok(())
            }
            Err(tungstenite::Error::Io(e)) if e.kind() == std::io::ErrorKind::WouldBlock => {
                c.congested = true;
                Ok(())
            }
            Err(_) => Err(StopCause::Disconnected),
        }
    }

    fn publish(&mut self, c: &mut Client) -> Option<StopCause> {
        if c.congested {
            // A pilot that stopped reading gets no new frames until it drains.
            if let Err(cause) = Self::flush(c) {
                return Some(cause);
            }
            if c.congested {
                self.stats.frames_skipped += 1;
                return None;
            }
        }
        let obs = self.world.observe();
        if self.cfg.observations {
            let text = format!(
                "{OBS_PREFIX}{}",
                serde_json::to_string(&obs).expect("observations serialize")
            );
            if let Err(cause) = Self::send(c, Message::text(text)) {
                return Some(cause);
            }
        }
        let img = render_view(&obs, self.cfg.width, self.cfg.height);
        let jpeg = encode_jpeg(&img, self.cfg.jpeg_quality, self.seq);
        self.seq += 1;
        if let Err(cause) = Self::send(c, Message::binary(jpeg)) {
            return Some(cause);
        }
        self.stats.frames_sent += 1;
        None
    }

    fn heartbeat(&mut self, c: &mut Client) -> Option<StopCause> {
        let now = Instant::now();
        if now.duration_since(c.last_pong) > self.cfg.dead_after() {
            return Some(StopCause::HeartbeatLost);
        }
        if now >= c.next_ping {
            c.next_ping = now + self.cfg.heartbeat;
            c.ping_count += 1;
            let payload = c.ping_count.to_be_bytes().to_vec();
            if let Err(cause) = Self::send(c, Message::Ping(payload.into())) {
                return Some(cause);
            }
        } else if c.congested {
            if let Err(cause) = Self::flush(c) {
                return Some(cause);
            }
        }
        None
    }
}
