//! Local-model protocol transcripts: the ordered public record of rounds,
//! queried parties, randomizer privacy parameters, and released messages.

use serde::Serialize;

/// One released message. `value` is the message content; it is part of the
/// public transcript, but JSON serialization omits it unless the
/// debug-nonprivate flag is set (values are only needed to replay runs).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Message {
    pub node: u32,
    /// Message size in bits as accounted by the protocol.
    pub bits: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<i64>,
}

/// One protocol round: every listed node ran the same local randomizer at
/// the same per-call epsilon and released one message.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Round {
    pub round: u32,
    pub randomizer: String,
    pub epsilon_per_call: f64,
    pub messages: Vec<Message>,
}

/// Full transcript of a simulated LEDP protocol.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Transcript {
    pub rounds: Vec<Round>,
}

impl Transcript {
    pub fn new() -> Self {
        Transcript::default()
    }

    pub fn push_round(&mut self, round: Round) {
        self.rounds.push(round);
    }

    pub fn round_count(&self) -> usize {
        self.rounds.len()
    }

    /// Maximum message size (bits) released by any single node in any round.
    pub fn max_message_bits(&self) -> u32 {
        self.rounds
            .iter()
            .flat_map(|r| r.messages.iter().map(|m| m.bits))
            .max()
            .unwrap_or(0)
    }

    /// JSON rendering; message values are stripped unless
    /// `debug_nonprivate` is set.
    pub fn to_json(&self, debug_nonprivate: bool) -> serde_json::Value {
        if debug_nonprivate {
            serde_json::to_value(self).expect("transcript serializes")
        } else {
            let mut redacted = self.clone();
            for round in &mut redacted.rounds {
                for msg in &mut round.messages {
                    msg.value = None;
                }
            }
            serde_json::to_value(&redacted).expect("transcript serializes")
        }
    }

    /// Parses a debug-nonprivate JSON transcript back (used by the
    /// transcript-sufficiency replay tests).
    pub fn from_json(v: &serde_json::Value) -> Option<Transcript> {
        let rounds = v.get("rounds")?.as_array()?;
        let mut out = Transcript::new();
        for r in rounds {
            let mut msgs = Vec::new();
            for m in r.get("messages")?.as_array()? {
                msgs.push(Message {
                    node: m.get("node")?.as_u64()? as u32,
                    bits: m.get("bits")?.as_u64()? as u32,
                    value: m.get("value").and_then(|x| x.as_i64()),
                });
            }
            out.push_round(Round {
                round: r.get("round")?.as_u64()? as u32,
                randomizer: r.get("randomizer")?.as_str()?.to_string(),
                epsilon_per_call: r.get("epsilon_per_call")?.as_f64()?,
                messages: msgs,
            });
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Transcript {
        let mut t = Transcript::new();
        t.push_round(Round {
            round: 0,
            randomizer: "level-bit".into(),
            epsilon_per_call: 0.01,
            messages: vec![
                Message {
                    node: 0,
                    bits: 1,
                    value: Some(1),
                },
                Message {
                    node: 1,
                    bits: 1,
                    value: Some(0),
                },
            ],
        });
        t
    }

    #[test]
    fn values_redacted_by_default() {
        let json = sample().to_json(false);
        let msg = &json["rounds"][0]["messages"][0];
        assert!(msg.get("value").is_none());
        assert_eq!(msg["bits"], 1);
    }

    #[test]
    fn debug_round_trips() {
        let t = sample();
        let json = t.to_json(true);
        assert_eq!(Transcript::from_json(&json).unwrap(), t);
    }

    #[test]
    fn max_bits() {
        assert_eq!(sample().max_message_bits(), 1);
        assert_eq!(Transcript::new().max_message_bits(), 0);
    }
}
