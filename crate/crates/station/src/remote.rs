//! Remote chat-completion backend: the prompts go to a hosted multimodal
//! model and its text replies are parsed into decisions.
//!
//! Every request resends the transcript. Only the preamble turn and the
//! current turn carry images; earlier directional turns are sent as text.

use std::io::Cursor;
use std::time::{Duration, Instant};

use base64::Engine;
use image::imageops::FilterType;
use serde_json::{json, Value};
use sg_core::mind::{
    parse_decision, Decided, Mind, MindError, Percept, Role, SessionHandle, SessionMap,
    READY_PHRASE,
};
use sg_core::PersonaSpec;

use crate::config::{FrameConfig, RemoteConfig};
use crate::render::{encode_jpeg, render_view};

/// Preamble attempts before giving up on the ready phrase.
pub const ACK_ATTEMPTS: usize = 2;

pub struct RemoteMind {
    agent: ureq::Agent,
    endpoint: String,
    model: String,
    api_key: Option<String>,
    frame: FrameConfig,
    panorama_jpeg: Option<String>,
    directional_prompt: String,
}

impl RemoteMind {
    pub fn new(cfg: &RemoteConfig) -> Self {
        let api_key = std::env::var(&cfg.api_key_env)
            .ok()
            .filter(|k| !k.is_empty());
        if api_key.is_none() {
            log::warn!(
                "{} is not set; requests go out without credentials",
                cfg.api_key_env
            );
        }
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs_f64(cfg.timeout_s)))
            .build()
            .into();
        Self {
            agent,
            endpoint: format!("{}/chat/completions", cfg.base_url.trim_end_matches('/')),
            model: cfg.model.clone(),
            api_key,
            frame: cfg.frame,
            panorama_jpeg: None,
            directional_prompt: String::new(),
        }
    }

    /// Base64 JPEG at the configured size. Observations are drawn first;
    /// camera frames are re-encoded only if their size differs.
    fn encode(&self, percept: Percept<'_>) -> Result<String, MindError> {
        let b64 = |bytes: &[u8]| base64::engine::general_purpose::STANDARD.encode(bytes);
        match percept {
            Percept::Observation(obs) => {
                let img = render_view(obs, self.frame.width, self.frame.height);
                Ok(b64(&encode_jpeg(
                    &img,
                    self.frame.jpeg_quality,
                    obs.timestamp_ms,
                )))
            }
            Percept::Image(bytes) => {
                let img = image::load_from_memory(bytes)
                    .map_err(|e| MindError::Transport(format!("undecodable frame: {e}")))?;
                if (img.width(), img.height()) == (self.frame.width, self.frame.height) {
                    return Ok(b64(bytes));
                }
                let img = img
                    .resize_exact(self.frame.width, self.frame.height, FilterType::Triangle)
                    .to_rgb8();
                let mut out = Cursor::new(Vec::new());
                image::codecs::jpeg::JpegEncoder::new_with_quality(
                    &mut out,
                    self.frame.jpeg_quality,
                )
                .encode_image(&img)
                .map_err(|e| MindError::Transport(e.to_string()))?;
                Ok(b64(out.get_ref()))
            }
        }
    }

    fn chat(&self, messages: Vec<Value>) -> Result<String, MindError> {
        let body = json!({ "model": self.model, "messages": messages });
        let mut req = self.agent.post(&self.endpoint);
        if let Some(k) = &self.api_key {
            req = req.header("Authorization", &format!("Bearer {k}"));
        }
        let mut resp = req
            .send_json(&body)
            .map_err(|e| MindError::Transport(e.to_string()))?;
        let v: Value = resp
            .body_mut()
            .read_json()
            .map_err(|e| MindError::Transport(format!("reply is not JSON: {e}")))?;
        v.pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| MindError::Transport("reply has no choices[0].message.content".into()))
    }
}

fn with_image(text: &str, jpeg_b64: &str) -> Value {
    json!({
        "role": "user",
        "content": [
            { "type": "text", "text": text },
            { "type": "image_url", "image_url": { "url": format!("data:image/jpeg;base64,{jpeg_b64}") } },
        ],
    })
}

fn role_name(r: Role) -> &'static str {
    match r {
        Role::User => "user",
        Role::Assistant => "assistant",
    }
}

impl Mind for RemoteMind {
    fn start_session(
        &mut self,
        persona: &PersonaSpec,
        panorama: Percept<'_>,
    ) -> Result<SessionHandle, MindError> {
        let pano = self.encode(panorama)?;
        let mut last = String::new();
        for attempt in 1..=ACK_ATTEMPTS {
            let t0 = Instant::now();
            let reply = self.chat(vec![with_image(&persona.preamble_prompt, &pano)])?;
            if reply.contains(READY_PHRASE) {
                self.panorama_jpeg = Some(pano);
                self.directional_prompt = persona.directional_prompt.clone();
                return Ok(SessionHandle::opened(
                    persona.id.clone(),
                    persona.preamble_prompt.clone(),
                    reply,
                    SessionMap::Opaque,
                    t0.elapsed().as_millis() as u64,
                ));
            }
            log::warn!("preamble attempt {attempt}: no ready phrase in {reply:?}");
            last = reply;
        }
        Err(MindError::AckMismatch(last))
    }

    fn decide(&mut self, session: &mut SessionHandle, percept: Percept<'_>) -> Decided {
        let t0 = Instant::now();
        let prompt = self.directional_prompt.clone();
        let Some(pano) = self.panorama_jpeg.clone().filter(|_| session.is_ready()) else {
            return session.fail(prompt, "", MindError::NotReady);
        };
        let frame = match self.encode(percept) {
            Ok(f) => f,
            Err(e) => return session.fail(prompt, "", e),
        };
        let t = session.transcript();
        let mut messages = vec![with_image(&t[0].content, &pano)];
        for m in &t[1..] {
            messages.push(json!({ "role": role_name(m.role), "content": m.content }));
        }
        messages.push(with_image(&prompt, &frame));
        let latency = |t0: Instant| t0.elapsed().as_millis() as u64;
        match self.chat(messages) {
            Ok(reply) => match parse_decision(&reply) {
                Ok(d) => {
                    session.push_exchange(prompt, reply);
                    Decided::ok(d.with_latency(latency(t0)))
                }
                Err(pf) => {
                    let mut out = session.fail(prompt, reply, MindError::Parse(pf));
                    out.decision.latency_ms = latency(t0);
                    out
                }
            },
            Err(e) => {
                let mut out = session.fail(prompt, "", e);
                out.decision.latency_ms = latency(t0);
                out
            }
        }
    }
}
