use crate::field::FieldElement;
use crate::mpc::Role;
use crate::net::{Message, MessageKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Sent,
    Received,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TranscriptEntry {
    pub direction: Direction,
    pub sender: Role,
    pub message: Message,
}

/// Ordered log of every message a party sent or received.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Transcript {
    entries: Vec<TranscriptEntry>,
}

impl Transcript {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, direction: Direction, sender: Role, message: Message) {
        self.entries.push(TranscriptEntry {
            direction,
            sender,
            message,
        });
    }

    pub fn entries(&self) -> &[TranscriptEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn filtered(&self, direction: Direction) -> impl Iterator<Item = &Message> {
        self.entries
            .iter()
            .filter(move |e| e.direction == direction)
            .map(|e| &e.message)
    }

    pub fn sent(&self) -> impl Iterator<Item = &Message> {
        self.filtered(Direction::Sent)
    }

    pub fn received(&self) -> impl Iterator<Item = &Message> {
        self.filtered(Direction::Received)
    }

    /// Real-valued payload entries sent by this party.
    pub fn sent_reals(&self) -> usize {
        self.sent().map(Message::real_count).sum()
    }

    /// Field-element payload entries sent by this party.
    pub fn sent_field_elements(&self) -> usize {
        self.sent().map(Message::field_count).sum()
    }

    pub fn sent_kinds(&self) -> Vec<MessageKind> {
        self.sent().map(Message::kind).collect()
    }

    /// Every received field element, flattened in arrival order.
    pub fn received_field_elements(&self) -> Vec<FieldElement> {
        self.received().flat_map(Message::field_elements).collect()
    }

    /// Every received real, flattened in arrival order.
    pub fn received_reals(&self) -> Vec<f64> {
        self.received()
            .flat_map(|m| match m {
                Message::ErrVec(v) => v.clone(),
                Message::ErrSum(x) => vec![*x],
                _ => Vec::new(),
            })
            .collect()
    }
}
