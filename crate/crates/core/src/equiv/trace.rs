use std::fmt;

use serde::{Deserialize, Serialize};

/// A finite run of clock cycles over named 1-bit signals.
///
/// `values[cycle][signal]` follows the order of `signals`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub signals: Vec<String>,
    pub values: Vec<Vec<bool>>,
}

impl Trace {
    /// Builds a trace from per-signal waveforms of equal length.
    ///
    /// ```
    /// use svakit::equiv::Trace;
    ///
    /// let t = Trace::from_waves(&[("a", &[1, 0]), ("b", &[0, 0])]);
    /// assert_eq!(t.len(), 2);
    /// assert!(t.value(0, "a").unwrap());
    /// ```
    pub fn from_waves(waves: &[(&str, &[u8])]) -> Trace {
        let len = waves.first().map_or(0, |(_, w)| w.len());
        assert!(waves.iter().all(|(_, w)| w.len() == len), "waveforms must have equal length");
        let signals = waves.iter().map(|(n, _)| n.to_string()).collect();
        let values = (0..len)
            .map(|c| waves.iter().map(|(_, w)| w[c] != 0).collect())
            .collect();
        Trace { signals, values }
    }

    /// Decodes a trace index in canonical enumeration order: bit
    /// `signal * len + cycle` of `index` is the value of that signal at
    /// that cycle.
    pub fn from_index(signals: &[String], len: usize, index: u64) -> Trace {
        let values = (0..len)
            .map(|c| {
                (0..signals.len())
                    .map(|s| (index >> (s * len + c)) & 1 == 1)
                    .collect()
            })
            .collect();
        Trace {
            signals: signals.to_vec(),
            values,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn signal_index(&self, name: &str) -> Option<usize> {
        self.signals.iter().position(|s| s == name)
    }

    pub fn value(&self, cycle: usize, name: &str) -> Option<bool> {
        let s = self.signal_index(name)?;
        self.values.get(cycle).map(|row| row[s])
    }

    /// Values of one signal packed into a bit mask, bit `c` for cycle `c`.
    pub(crate) fn wave_mask(&self, signal: usize) -> u64 {
        self.values
            .iter()
            .enumerate()
            .fold(0, |m, (c, row)| if row[signal] { m | 1 << c } else { m })
    }
}

/// Renders a per-cycle table:
///
/// ```text
/// cycle | 0 1
/// a     | 1 0
/// b     | 0 0
/// ```
impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.signals.iter().map(|s| s.len()).max().unwrap_or(0).max(5);
        write!(f, "{:width$} |", "cycle")?;
        for c in 0..self.len() {
            write!(f, " {c}")?;
        }
        writeln!(f)?;
        for (s, name) in self.signals.iter().enumerate() {
            write!(f, "{name:width$} |")?;
            for (c, row) in self.values.iter().enumerate() {
                let pad = c.to_string().len();
                write!(f, " {:>pad$}", u8::from(row[s]))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}
