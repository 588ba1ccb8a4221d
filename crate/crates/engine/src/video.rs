//! Video decoding to 8-bit luma frames.
//!
//! YUV4MPEG2 (`.y4m`) is read natively. Other containers are transcoded to
//! Y4M through an `ffmpeg` binary found on `PATH` (or `LOCOT2V_FFMPEG`).

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};

use locot2v_core::frame::GrayFrame;
use locot2v_core::VideoAsset;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Video {
    pub fps: f64,
    pub frames: Vec<GrayFrame>,
}

impl Video {
    pub fn width(&self) -> usize {
        self.frames.first().map_or(0, |f| f.width)
    }

    pub fn height(&self) -> usize {
        self.frames.first().map_or(0, |f| f.height)
    }

    pub fn duration_s(&self) -> f64 {
        self.frames.len() as f64 / self.fps
    }

    pub fn asset(&self, sample_id: &str, path: &Path) -> Result<VideoAsset> {
        Ok(VideoAsset::new(
            sample_id,
            &path.to_string_lossy(),
            self.fps,
            self.frames.len(),
        )?)
    }
}

fn bad(path: &Path, message: impl Into<String>) -> Error {
    Error::Video {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

fn parse_fps(token: &str) -> Option<f64> {
    let (n, d) = token.split_once(':')?;
    let n: f64 = n.parse().ok()?;
    let d: f64 = d.parse().ok()?;
    (n > 0.0 && d > 0.0).then_some(n / d)
}

/// Chroma plane size for a Y4M colourspace tag.
fn chroma_bytes(colorspace: &str, w: usize, h: usize) -> Option<usize> {
    let c = colorspace.trim_end_matches("jpeg").trim_end_matches("paldv").trim_end_matches("mpeg2");
    match c {
        "420" | "420p" => Some(2 * w.div_ceil(2) * h.div_ceil(2)),
        "422" => Some(2 * w.div_ceil(2) * h),
        "444" => Some(2 * w * h),
        "mono" => Some(0),
        _ => None,
    }
}

/// Reads a YUV4MPEG2 stream, keeping only the luma plane of each frame.
pub fn read_y4m(reader: impl Read, path: &Path) -> Result<Video> {
    let mut r = BufReader::new(reader);
    let mut header = Vec::new();
    r.read_until(b'\n', &mut header).map_err(|e| Error::io(path, e))?;
    let header = String::from_utf8_lossy(&header);
    let mut tokens = header.split_whitespace();
    if tokens.next() != Some("YUV4MPEG2") {
        return Err(bad(path, "missing YUV4MPEG2 signature"));
    }
    let (mut w, mut h, mut fps, mut cs) = (0usize, 0usize, None, String::from("420jpeg"));
    for t in tokens {
        let (tag, val) = t.split_at(1);
        match tag {
            "W" => w = val.parse().map_err(|_| bad(path, "bad width"))?,
            "H" => h = val.parse().map_err(|_| bad(path, "bad height"))?,
            "F" => fps = parse_fps(val),
            "C" => cs = val.to_string(),
            _ => {}
        }
    }
    let fps = fps.ok_or_else(|| bad(path, "missing or invalid frame rate"))?;
    if w == 0 || h == 0 {
        return Err(bad(path, "missing frame size"));
    }
    let chroma = chroma_bytes(&cs, w, h).ok_or_else(|| bad(path, format!("unsupported colourspace C{cs}")))?;
    let mut frames = Vec::new();
    let mut line = Vec::new();
    loop {
        line.clear();
        let n = r.read_until(b'\n', &mut line).map_err(|e| Error::io(path, e))?;
        if n == 0 {
            break;
        }
        if !line.starts_with(b"FRAME") {
            return Err(bad(path, format!("expected FRAME marker at frame {}", frames.len())));
        }
        let mut luma = vec![0u8; w * h];
        r.read_exact(&mut luma)
            .map_err(|_| bad(path, format!("truncated frame {}", frames.len())))?;
        let mut skip = vec![0u8; chroma];
        r.read_exact(&mut skip)
            .map_err(|_| bad(path, format!("truncated chroma in frame {}", frames.len())))?;
        frames.push(GrayFrame::new(w, h, luma)?);
    }
    if frames.is_empty() {
        return Err(bad(path, "no frames"));
    }
    Ok(Video { fps, frames })
}

/// Writes luma frames as a `Cmono` Y4M stream.
pub fn write_y4m(mut w: impl Write, video: &Video) -> std::io::Result<()> {
    let (num, den) = fps_fraction(video.fps);
    writeln!(
        w,
        "YUV4MPEG2 W{} H{} F{num}:{den} Ip A1:1 Cmono",
        video.width(),
        video.height()
    )?;
    for f in &video.frames {
        w.write_all(b"FRAME\n")?;
        w.write_all(&f.data)?;
    }
    w.flush()
}

fn fps_fraction(fps: f64) -> (u64, u64) {
    if (fps - fps.round()).abs() < 1e-9 {
        (fps.round() as u64, 1)
    } else {
        ((fps * 1000.0).round() as u64, 1000)
    }
}

pub fn save_y4m(path: &Path, video: &Video) -> Result<()> {
    let f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_y4m(std::io::BufWriter::new(f), video).map_err(|e| Error::io(path, e))
}

fn ffmpeg_binary() -> String {
    std::env::var("LOCOT2V_FFMPEG").unwrap_or_else(|_| "ffmpeg".to_string())
}

fn decode_with_ffmpeg(path: &Path) -> Result<Video> {
    let child = Command::new(ffmpeg_binary())
        .args(["-v", "error", "-nostdin", "-i"])
        .arg(path)
        .args(["-f", "yuv4mpegpipe", "-pix_fmt", "gray", "-"])
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| bad(path, format!("cannot decode without ffmpeg: {e}")))?;
    let out = child.wait_with_output().map_err(|e| Error::io(path, e))?;
    if !out.status.success() {
        return Err(bad(path, String::from_utf8_lossy(&out.stderr).trim().to_string()));
    }
    read_y4m(&out.stdout[..], path)
}

pub fn load_video(path: &Path) -> Result<Video> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .unwrap_or("")
        .to_ascii_lowercase();
    if ext == "y4m" {
        let f = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        read_y4m(f, path)
    } else {
        decode_with_ffmpeg(path)
    }
}

/// First existing `<dir>/<id>.<ext>` in extension order.
pub fn find_video(dir: &Path, sample_id: &str, extensions: &[String]) -> Option<PathBuf> {
    extensions
        .iter()
        .map(|e| dir.join(format!("{sample_id}.{}", e.trim_start_matches('.'))))
        .find(|p| p.is_file())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> Video {
        Video {
            fps: 8.0,
            frames: (0..3)
                .map(|i| GrayFrame::from_fn(4, 2, |x, y| (i * 10 + x + y) as u8))
                .collect(),
        }
    }

    #[test]
    fn mono_round_trip() {
        let v = tiny();
        let mut buf = Vec::new();
        write_y4m(&mut buf, &v).unwrap();
        assert_eq!(read_y4m(&buf[..], Path::new("x.y4m")).unwrap(), v);
    }

    #[test]
    fn reads_420_and_skips_chroma() {
        let mut buf = b"YUV4MPEG2 W4 H2 F25:1 Ip C420jpeg\n".to_vec();
        for i in 0..2u8 {
            buf.extend_from_slice(b"FRAME\n");
            buf.extend_from_slice(&[i; 8]);
            buf.extend_from_slice(&[128; 4]);
        }
        let v = read_y4m(&buf[..], Path::new("x.y4m")).unwrap();
        assert_eq!(v.frames.len(), 2);
        assert_eq!(v.fps, 25.0);
        assert!(v.frames[1].data.iter().all(|&p| p == 1));
    }

    #[test]
    fn fractional_rates() {
        assert!((parse_fps("30000:1001").unwrap() - 29.97).abs() < 1e-3);
        assert_eq!(fps_fraction(24.0), (24, 1));
        assert_eq!(fps_fraction(29.97), (29970, 1000));
    }

    #[test]
    fn rejects_garbage() {
        assert!(read_y4m(&b"RIFF...."[..], Path::new("x")).is_err());
        let truncated = b"YUV4MPEG2 W4 H2 F25:1 Cmono\nFRAME\n\x01\x02".to_vec();
        assert!(read_y4m(&truncated[..], Path::new("x")).is_err());
    }

    #[test]
    fn probing_order() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("s1.webm"), b"").unwrap();
        fs::write(dir.path().join("s1.mkv"), b"").unwrap();
        let exts: Vec<String> = ["y4m", "mp4", "webm", "mkv"].iter().map(|s| s.to_string()).collect();
        assert_eq!(find_video(dir.path(), "s1", &exts), Some(dir.path().join("s1.webm")));
        assert_eq!(find_video(dir.path(), "s2", &exts), None);
    }
}
