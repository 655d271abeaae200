//! Run metrics: rolling communicative success, linguistic coherence, and
//! effective inventory size.
//!
//! All three headline metrics are windowed over the most recent games so
//! they track the current state of the population rather than its history:
//!
//! * success: fraction of the last up-to-1000 games won;
//! * coherence: fraction of the last up-to-1000 games in which the listener
//!   would have produced the very form the speaker chose;
//! * inventory size: per agent, the number of distinct forms it uttered in
//!   its last up-to-1000 games as speaker, averaged over agents that have
//!   spoken at all.
//!
//! Windows shorter than their capacity average over what is present, so the
//! metrics are defined from the first game on.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub const METRIC_WINDOW: usize = 1000;

/// Fixed-capacity mean over the most recent samples.
#[derive(Debug, Clone)]
pub struct RollingWindow {
    cap: usize,
    values: VecDeque<f64>,
    sum: f64,
}

impl RollingWindow {
    pub fn new(cap: usize) -> Self {
        assert!(cap > 0);
        RollingWindow { cap, values: VecDeque::with_capacity(cap), sum: 0.0 }
    }

    pub fn push(&mut self, x: f64) {
        if self.values.len() == self.cap {
            self.sum -= self.values.pop_front().expect("window non-empty");
        }
        self.values.push_back(x);
        self.sum += x;
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Mean over the present samples; `None` before the first push.
    pub fn mean(&self) -> Option<f64> {
        (!self.values.is_empty()).then(|| self.sum / self.values.len() as f64)
    }
}

/// The last up-to-`cap` forms one agent uttered as speaker, with distinct
/// counts maintained incrementally.
#[derive(Debug, Clone)]
struct SpeakerHistory {
    cap: usize,
    forms: VecDeque<String>,
    counts: BTreeMap<String, u32>,
}

impl SpeakerHistory {
    fn new(cap: usize) -> Self {
        SpeakerHistory { cap, forms: VecDeque::with_capacity(cap), counts: BTreeMap::new() }
    }

    fn push(&mut self, form: &str) {
        if self.forms.len() == self.cap {
            let old = self.forms.pop_front().expect("history non-empty");
            match self.counts.get_mut(&old) {
                Some(n) if *n > 1 => *n -= 1,
                _ => {
                    self.counts.remove(&old);
                }
            }
        }
        self.forms.push_back(form.into());
        *self.counts.entry(form.into()).or_insert(0) += 1;
    }

    fn distinct(&self) -> usize {
        self.counts.len()
    }

    fn is_empty(&self) -> bool {
        self.forms.is_empty()
    }
}

/// One row of the periodically sampled metric series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub game: u64,
    pub success: Option<f64>,
    pub coherence: Option<f64>,
    pub inventory: Option<f64>,
}

/// End-of-run metric digest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub games: u64,
    /// Success fraction over the whole run.
    pub success_overall: f64,
    /// Coherence fraction over the whole run.
    pub coherence_overall: f64,
    pub window_success: Option<f64>,
    pub window_coherence: Option<f64>,
    pub window_inventory: Option<f64>,
    /// Largest windowed inventory seen at any point of the run.
    pub peak_window_inventory: f64,
}

/// Accumulates per-game observations into windows, totals, and a sampled
/// series. Fed by the engine; knows nothing about agents beyond their count.
#[derive(Debug, Clone)]
pub struct MetricsTracker {
    success: RollingWindow,
    coherence: RollingWindow,
    histories: Vec<SpeakerHistory>,
    games: u64,
    successes: u64,
    coherent: u64,
    series_stride: Option<u64>,
    series: Vec<SeriesRow>,
    peak_inventory: f64,
}

impl MetricsTracker {
    pub fn new(num_agents: usize, series_stride: Option<u64>) -> Self {
        MetricsTracker {
            success: RollingWindow::new(METRIC_WINDOW),
            coherence: RollingWindow::new(METRIC_WINDOW),
            histories: (0..num_agents).map(|_| SpeakerHistory::new(METRIC_WINDOW)).collect(),
            games: 0,
            successes: 0,
            coherent: 0,
            series_stride,
            series: Vec::new(),
            peak_inventory: 0.0,
        }
    }

    /// Ingests one game outcome. `utterance` is what the speaker said, if
    /// anything; `coherent` is the listener-probe verdict.
    pub fn observe(
        &mut self,
        speaker: u32,
        utterance: Option<&str>,
        success: bool,
        coherent: Option<bool>,
    ) {
        self.games += 1;
        self.success.push(success as u8 as f64);
        self.successes += success as u64;
        if let Some(c) = coherent {
            self.coherence.push(c as u8 as f64);
            self.coherent += c as u64;
        }
        if let Some(form) = utterance {
            self.histories[speaker as usize].push(form);
        }
        if let Some(inv) = self.inventory_size() {
            self.peak_inventory = self.peak_inventory.max(inv);
        }
        if let Some(stride) = self.series_stride {
            if self.games % stride == 0 {
                let row = self.snapshot();
                self.series.push(row);
            }
        }
    }

    /// Mean distinct-form count over agents that have spoken.
    pub fn inventory_size(&self) -> Option<f64> {
        let mut sum = 0usize;
        let mut speakers = 0usize;
        for h in &self.histories {
            if !h.is_empty() {
                sum += h.distinct();
                speakers += 1;
            }
        }
        (speakers > 0).then(|| sum as f64 / speakers as f64)
    }

    pub fn games(&self) -> u64 {
        self.games
    }

    pub fn snapshot(&self) -> SeriesRow {
        SeriesRow {
            game: self.games,
            success: self.success.mean(),
            coherence: self.coherence.mean(),
            inventory: self.inventory_size(),
        }
    }

    pub fn series(&self) -> &[SeriesRow] {
        &self.series
    }

    pub fn summary(&self) -> MetricsSummary {
        MetricsSummary {
            games: self.games,
            success_overall: if self.games > 0 { self.successes as f64 / self.games as f64 } else { 0.0 },
            coherence_overall: if self.games > 0 { self.coherent as f64 / self.games as f64 } else { 0.0 },
            window_success: self.success.mean(),
            window_coherence: self.coherence.mean(),
            window_inventory: self.inventory_size(),
            peak_window_inventory: self.peak_inventory,
        }
    }
}
