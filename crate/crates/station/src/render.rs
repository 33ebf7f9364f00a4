//! Raster output: a schematic first-person camera frame for the link, and
//! top-down snapshots for debugging.

use std::io::Cursor;

use image::codecs::jpeg::JpegEncoder;
use image::{ImageFormat, Rgb, RgbImage};
use sg_core::sim::{Shape, Vec2, World};
use sg_core::{EntityKind, Observation};

const SOI: [u8; 2] = [0xFF, 0xD8];
const EOI: [u8; 2] = [0xFF, 0xD9];
const COM: u8 = 0xFE;

fn kind_color(kind: EntityKind) -> Rgb<u8> {
    match kind {
        EntityKind::Wall => Rgb([150, 150, 160]),
        EntityKind::Window => Rgb([120, 180, 230]),
        EntityKind::Landmark => Rgb([240, 240, 235]),
        EntityKind::Human => Rgb([220, 120, 90]),
        EntityKind::Obstacle => Rgb([120, 90, 60]),
        EntityKind::OpenSpace => Rgb([90, 200, 120]),
    }
}

fn fill_rect(img: &mut RgbImage, x0: i64, y0: i64, x1: i64, y1: i64, c: Rgb<u8>) {
    let (w, h) = (img.width() as i64, img.height() as i64);
    for y in y0.max(0)..y1.min(h) {
        for x in x0.max(0)..x1.min(w) {
            img.put_pixel(x as u32, y as u32, c);
        }
    }
}

/// Paints an observation as a flat camera view: each entity is a column at
/// its bearing, taller when nearer. Far things are painted first.
pub fn render_view(obs: &Observation, width: u32, height: u32) -> RgbImage {
    let mut img = RgbImage::new(width, height);
    let horizon = height as i64 / 2;
    fill_rect(&mut img, 0, 0, width as i64, horizon, Rgb([60, 60, 80]));
    fill_rect(
        &mut img,
        0,
        horizon,
        width as i64,
        height as i64,
        Rgb([95, 85, 75]),
    );

    let mut ents: Vec<_> = obs.entities.iter().collect();
    ents.sort_by(|a, b| b.range_m.total_cmp(&a.range_m));
    let px_per_deg = width as f64 / obs.fov_deg;
    for e in ents {
        let cx = (e.bearing_deg + obs.fov_deg / 2.0) * px_per_deg;
        let r = e.range_m.max(0.1);
        let half_w = ((0.5 / r).atan().to_degrees() * px_per_deg).max(2.0);
        let half_h = (height as f64 * 0.4 / r).min(height as f64 / 2.0);
        let (x0, x1) = ((cx - half_w) as i64, (cx + half_w) as i64);
        match e.kind {
            EntityKind::OpenSpace => {
                fill_rect(
                    &mut img,
                    x0,
                    horizon - 2,
                    x1,
                    horizon + 2,
                    kind_color(e.kind),
                );
            }
            EntityKind::Human => {
                let top = horizon - (half_h * 1.2) as i64;
                fill_rect(
                    &mut img,
                    x0,
                    top,
                    x1,
                    horizon + half_h as i64,
                    kind_color(e.kind),
                );
            }
            _ => {
                let (top, bottom) = (horizon - half_h as i64, horizon + half_h as i64);
                fill_rect(&mut img, x0, top, x1, bottom, kind_color(e.kind));
            }
        }
    }
    img
}

/// JPEG with a `seq=N` comment segment right after the SOI marker.
pub fn encode_jpeg(img: &RgbImage, quality: u8, seq: u64) -> Vec<u8> {
    let mut raw = Vec::new();
    JpegEncoder::new_with_quality(&mut raw, quality.clamp(1, 100))
        .encode_image(img)
        .expect("in-memory JPEG encoding");
    let payload = format!("seq={seq}");
    let len = (payload.len() + 2) as u16;
    let mut out = Vec::with_capacity(raw.len() + payload.len() + 4);
    out.extend_from_slice(&raw[..2]);
    out.extend_from_slice(&[0xFF, COM]);
    out.extend_from_slice(&len.to_be_bytes());
    out.extend_from_slice(payload.as_bytes());
    out.extend_from_slice(&raw[2..]);
    out
}

pub fn is_jpeg(bytes: &[u8]) -> bool {
    bytes.len() >= 4 && bytes[..2] == SOI && bytes[bytes.len() - 2..] == EOI
}

/// Reads the `seq=N` stamp written by [`encode_jpeg`], scanning header
/// segments up to the first scan.
pub fn frame_seq(bytes: &[u8]) -> Option<u64> {
    if bytes.len() < 4 || bytes[..2] != SOI {
        return None;
    }
    let mut i = 2;
    while i + 4 <= bytes.len() && bytes[i] == 0xFF {
        let marker = bytes[i + 1];
        if marker == 0xDA {
            return None;
        }
        let len = u16::from_be_bytes([bytes[i + 2], bytes[i + 3]]) as usize;
        let body = bytes.get(i + 4..i + 2 + len)?;
        if marker == COM {
            if let Some(n) = std::str::from_utf8(body)
                .ok()
                .and_then(|s| s.strip_prefix("seq="))
            {
                return n.parse().ok();
            }
        }
        i += 2 + len;
    }
    None
}

/// Top-down map of the world at `px_per_m`, as PNG bytes.
pub fn render_top_down(world: &World, px_per_m: f64) -> Vec<u8> {
    let env = world.env();
    let w = (env.bounds.width() * px_per_m).ceil().max(1.0) as u32;
    let h = (env.bounds.height() * px_per_m).ceil().max(1.0) as u32;
    let mut img = RgbImage::from_pixel(w, h, Rgb([245, 245, 240]));
    // Image rows grow downward; world y grows north.
    let to_px = |p: Vec2| {
        (
            (p.x - env.bounds.min.x) * px_per_m,
            (env.bounds.max.y - p.y) * px_per_m,
        )
    };
    for o in &env.obstacles {
        let c = kind_color(EntityKind::Obstacle);
        match o.shape {
            Shape::Circle { center, radius } => {
                let (cx, cy) = to_px(center);
                let r = radius * px_per_m;
                disc(&mut img, cx, cy, r, c);
            }
            Shape::Box { center, size } => {
                let (x0, y0) = to_px(Vec2::new(center.x - size.x / 2.0, center.y + size.y / 2.0));
                let (x1, y1) = to_px(Vec2::new(center.x + size.x / 2.0, center.y - size.y / 2.0));
                fill_rect(&mut img, x0 as i64, y0 as i64, x1 as i64, y1 as i64, c);
            }
        }
    }
    for l in &env.landmarks {
        let (x, y) = to_px(l.position);
        disc(&mut img, x, y, 3.0, kind_color(EntityKind::Landmark));
    }
    for p in world.humans() {
        let (x, y) = to_px(p);
        disc(
            &mut img,
            x,
            y,
            0.3 * px_per_m,
            kind_color(EntityKind::Human),
        );
    }
    let s = world.state();
    let (bx, by) = to_px(s.position());
    disc(&mut img, bx, by, 0.4 * px_per_m, Rgb([80, 80, 220]));
    let nose = s.position() + Vec2::from_heading(s.heading_deg) * 0.8;
    let (nx, ny) = to_px(nose);
    for k in 0..=20 {
        let t = k as f64 / 20.0;
        disc(
            &mut img,
            bx + (nx - bx) * t,
            by + (ny - by) * t,
            1.0,
            Rgb([20, 20, 90]),
        );
    }
    let mut out = Cursor::new(Vec::new());
    img.write_to(&mut out, ImageFormat::Png)
        .expect("in-memory PNG encoding");
    out.into_inner()
}

fn disc(img: &mut RgbImage, cx: f64, cy: f64, r: f64, c: Rgb<u8>) {
    let r = r.max(1.0);
    let (x0, x1) = ((cx - r).floor() as i64, (cx + r).ceil() as i64);
    let (y0, y1) = ((cy - r).floor() as i64, (cy + r).ceil() as i64);
    for y in y0.max(0)..y1.min(img.height() as i64) {
        for x in x0.max(0)..x1.min(img.width() as i64) {
            let (dx, dy) = (x as f64 + 0.5 - cx, y as f64 + 0.5 - cy);
            if dx * dx + dy * dy <= r * r {
                img.put_pixel(x as u32, y as u32, c);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use sg_core::sim::{Environment, SimConfig};
    use sg_core::SceneEntity;

    #[test]
    fn stamped_jpeg_round_trips() {
        let obs = Observation::new(
            vec![
                SceneEntity::new(EntityKind::Human, 10.0, 2.0, "visitor"),
                SceneEntity::new(EntityKind::Wall, -40.0, 5.0, "wall-west"),
                SceneEntity::new(EntityKind::OpenSpace, 60.0, 7.0, "OpenSpace@60"),
            ],
            0,
        );
        let img = render_view(&obs, 640, 480);
        let bytes = encode_jpeg(&img, 80, 4242);
        assert!(is_jpeg(&bytes));
        assert_eq!(frame_seq(&bytes), Some(4242));
        let decoded = image::load_from_memory(&bytes).unwrap();
        assert_eq!((decoded.width(), decoded.height()), (640, 480));
    }

    #[test]
    fn markers() {
        assert!(!is_jpeg(b"\x00\xD8abc\xFF\xD9"));
        assert!(!is_jpeg(b"\xFF\xD8abc\xFF"));
        assert_eq!(frame_seq(b"\xFF\xD8\xFF\xD9"), None);
    }

    #[test]
    fn snapshot_is_png() {
        let world = World::new(Environment::atrium(), SimConfig::default()).unwrap();
        let png = render_top_down(&world, 10.0);
        assert_eq!(&png[..8], b"\x89PNG\r\n\x1a\n");
    }
}
