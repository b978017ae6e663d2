//! Aggregated counters reported by a simulation run.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// End-of-run totals. Field declaration order defines the CSV column order.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// Frames generated by honest endpoints (including sends the energy
    /// gate then refused).
    pub sent: u64,
    /// Frames accepted by their intended receiver.
    pub delivered: u64,
    /// Frames rejected for a bad or missing authentication tag.
    pub rejected_mac: u64,
    /// Frames rejected by the counter freshness check.
    pub rejected_replay: u64,
    /// Frames rejected for carrying a retired key epoch.
    pub rejected_stale: u64,
    /// Challenge responses rejected by nonce verification.
    pub rejected_not_fresh: u64,
    /// Sends or receives refused by the energy gate.
    pub rejected_energy: u64,
    /// Broadcast frames discarded because the key could already be public.
    pub unsafe_late: u64,
    /// Frames put on the wire by attackers.
    pub attacker_frames_emitted: u64,
    /// Attacker frames an honest receiver accepted as valid.
    pub attacker_frames_accepted: u64,
    /// Plaintext payloads readable from the eavesdropper's log.
    pub plaintext_recoveries: u64,
    /// Energy drawn per node over the whole run.
    pub energy_spent: BTreeMap<u16, f64>,
    /// Mean accept latency over delivered frames, in milliseconds.
    pub latency_mean_ms: f64,
    /// Worst-case accept latency, in milliseconds.
    pub latency_max_ms: u64,
}

impl MetricsReport {
    /// CSV header naming every field in declaration order.
    pub fn csv_header() -> String {
        [
            "sent",
            "delivered",
            "rejected_mac",
            "rejected_replay",
            "rejected_stale",
            "rejected_not_fresh",
            "rejected_energy",
            "unsafe_late",
            "attacker_frames_emitted",
            "attacker_frames_accepted",
            "plaintext_recoveries",
            "energy_spent",
            "latency_mean_ms",
            "latency_max_ms",
        ]
        .join(",")
    }

    /// One CSV row matching [`csv_header`](Self::csv_header). The energy map
    /// is packed as `id:value` pairs separated by semicolons.
    pub fn to_csv_row(&self) -> String {
        let energy = self
            .energy_spent
            .iter()
            .map(|(id, e)| format!("{id}:{e}"))
            .collect::<Vec<_>>()
            .join(";");
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.sent,
            self.delivered,
            self.rejected_mac,
            self.rejected_replay,
            self.rejected_stale,
            self.rejected_not_fresh,
            self.rejected_energy,
            self.unsafe_late,
            self.attacker_frames_emitted,
            self.attacker_frames_accepted,
            self.plaintext_recoveries,
            energy,
            self.latency_mean_ms,
            self.latency_max_ms,
        )
    }

    /// The report as a single JSON object on one line.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> MetricsReport {
        MetricsReport {
            sent: 10,
            delivered: 9,
            rejected_mac: 1,
            energy_spent: BTreeMap::from([(1, 25.1), (2, 12.55)]),
            latency_mean_ms: 5.0,
            latency_max_ms: 7,
            ..MetricsReport::default()
        }
    }

    #[test]
    fn header_and_row_have_matching_arity() {
        let header = MetricsReport::csv_header();
        let row = sample().to_csv_row();
        assert_eq!(
            header.split(',').count(),
            row.split(',').count(),
            "{header}\n{row}"
        );
    }

    #[test]
    fn csv_row_golden() {
        assert_eq!(
            sample().to_csv_row(),
            "10,9,1,0,0,0,0,0,0,0,0,1:25.1;2:12.55,5,7"
        );
    }

    #[test]
    fn json_line_roundtrips_with_integer_node_keys() {
        let line = sample().to_json_line();
        assert!(!line.contains('\n'));
        // Map keys stringify in JSON; they must parse back to u16.
        assert!(line.contains("\"1\":25.1"), "{line}");
        let back: MetricsReport = serde_json::from_str(&line).unwrap();
        assert_eq!(back, sample());
    }

    #[test]
    fn json_field_names_match_csv_header() {
        let v: serde_json::Value = serde_json::from_str(&sample().to_json_line()).unwrap();
        let obj = v.as_object().unwrap();
        for name in MetricsReport::csv_header().split(',') {
            assert!(obj.contains_key(name), "missing {name}");
        }
        assert_eq!(obj.len(), MetricsReport::csv_header().split(',').count());
    }
}
