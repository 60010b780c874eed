//! Windowed deviation monitor for a live raw bit stream.
//!
//! Each full window of `window_bits` bits gets its own plug-in deviation
//! `D` and uncertainty `sigma_D = sqrt(2 D / (W ln 2))`. A window alarms when
//! `D > sigma_k * sigma_D` and, if configured, `D > deviation_threshold`.

use std::io::{self, Read, Write};

use randev_core::estimators::{deviation_plugin, PairCounts};
use randev_core::model::deviation_sigma;
use randev_core::BitSequence;

const READ_BLOCK: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonitorConfig {
    pub window_bits: usize,
    pub sigma_k: f64,
    pub deviation_threshold: Option<f64>,
}

impl Default for MonitorConfig {
    fn default() -> Self {
        Self {
            window_bits: 1 << 20,
            sigma_k: 3.0,
            deviation_threshold: None,
        }
    }
}

impl MonitorConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.window_bits < 1024 {
            return Err(format!(
                "window must hold at least 1024 bits, got {}",
                self.window_bits
            ));
        }
        if !(self.sigma_k.is_finite() && self.sigma_k > 0.0) {
            return Err(format!("sigma multiplier must be positive, got {}", self.sigma_k));
        }
        if let Some(t) = self.deviation_threshold {
            if !(t.is_finite() && t >= 0.0) {
                return Err(format!("deviation threshold must be non-negative, got {t}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowStatus {
    Ok,
    Alarm,
    Incomplete,
}

impl WindowStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            WindowStatus::Ok => "ok",
            WindowStatus::Alarm => "ALARM",
            WindowStatus::Incomplete => "incomplete",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowReport {
    pub index: u64,
    pub bits: u64,
    /// `None` when the window holds fewer than two bits.
    pub d_hat: Option<f64>,
    pub sigma_d: Option<f64>,
    pub status: WindowStatus,
}

impl WindowReport {
    pub fn line(&self) -> String {
        let num = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.6e}"));
        format!(
            "{},{},{},{}",
            self.index,
            num(self.d_hat),
            num(self.sigma_d),
            self.status.as_str()
        )
    }
}

/// Incremental window splitter and scorer.
#[derive(Debug, Clone)]
pub struct Monitor {
    config: MonitorConfig,
    index: u64,
    window: PairCounts,
    alarmed: bool,
}

impl Monitor {
    pub fn new(config: MonitorConfig) -> Self {
        Self {
            config,
            index: 0,
            window: PairCounts::new(),
            alarmed: false,
        }
    }

    pub fn any_alarm(&self) -> bool {
        self.alarmed
    }

    fn score(&self, counts: &PairCounts, complete: bool) -> WindowReport {
        let d_hat = deviation_plugin(counts).ok();
        let sigma_d = d_hat.map(|d| deviation_sigma(d, counts.n));
        let status = match (complete, d_hat, sigma_d) {
            (false, _, _) => WindowStatus::Incomplete,
            (true, Some(d), Some(s)) => {
                let significant = d > self.config.sigma_k * s;
                let above_floor = self.config.deviation_threshold.is_none_or(|t| d > t);
                if significant && above_floor {
                    WindowStatus::Alarm
                } else {
                    WindowStatus::Ok
                }
            }
            _ => WindowStatus::Ok,
        };
        WindowReport {
            index: self.index,
            bits: counts.n,
            d_hat,
            sigma_d,
            status,
        }
    }

    /// Consumes bits; returns a report for every window completed by them.
    pub fn feed(&mut self, bits: &BitSequence) -> Vec<WindowReport> {
        let width = self.config.window_bits as u64;
        let mut done = Vec::new();
        let mut pos = 0;
        while pos < bits.len() {
            let room = (width - self.window.n) as usize;
            let take = room.min(bits.len() - pos);
            self.window = self.window.merge(&PairCounts::from_range(bits, pos, take));
            pos += take;
            if self.window.n == width {
                let report = self.score(&self.window, true);
                self.alarmed |= report.status == WindowStatus::Alarm;
                done.push(report);
                self.index += 1;
                // Windows are scored independently; no pair spans two windows.
                self.window = PairCounts::new();
            }
        }
        done
    }

    /// The trailing partial window, if any bits are pending. Also reports an
    /// empty stream as one empty incomplete window.
    pub fn finish(&self) -> Option<WindowReport> {
        if self.window.n > 0 || self.index == 0 {
            Some(self.score(&self.window, false))
        } else {
            None
        }
    }
}

/// Runs the monitor to the end of `input`, writing one line per window.
/// Returns whether any window alarmed.
pub fn run<R: Read, W: Write>(mut input: R, mut out: W, config: MonitorConfig) -> io::Result<bool> {
    let mut monitor = Monitor::new(config);
    let mut buf = vec![0u8; READ_BLOCK];
    loop {
        let got = match input.read(&mut buf) {
            Ok(0) => break,
            Ok(n) => n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => continue,
            Err(e) => return Err(e),
        };
        for report in monitor.feed(&BitSequence::from_bytes(buf[..got].to_vec())) {
            writeln!(out, "{}", report.line())?;
        }
    }
    if let Some(report) = monitor.finish() {
        writeln!(out, "{}", report.line())?;
    }
    out.flush()?;
    Ok(monitor.any_alarm())
}
