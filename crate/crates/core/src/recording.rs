use crate::error::{Error, Result};
use crate::partials::NoteContext;
use crate::spectral::TimeSignal;

/// Calibrated multichannel recording of one note, samples in Pa.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordingSet {
    channels: Vec<TimeSignal>,
    context: NoteContext,
}

impl RecordingSet {
    pub fn new(channels: Vec<TimeSignal>, context: NoteContext) -> Result<Self> {
        let first = channels
            .first()
            .ok_or_else(|| Error::EmptyInput("recording has no channels".into()))?;
        let (len, fs) = (first.len(), first.sample_rate());
        if channels
            .iter()
            .any(|c| c.len() != len || c.sample_rate() != fs)
        {
            return Err(Error::Dimension(
                "recording channels differ in length or sample rate".into(),
            ));
        }
        context.check_length(len)?;
        Ok(Self { channels, context })
    }

    pub fn channels(&self) -> &[TimeSignal] {
        &self.channels
    }

    pub fn context(&self) -> &NoteContext {
        &self.context
    }

    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels[0].is_empty()
    }

    pub fn sample_rate(&self) -> f64 {
        self.channels[0].sample_rate()
    }

    /// The steady part of every channel.
    pub fn steady_part(&self) -> Vec<TimeSignal> {
        let (start, end) = self.context.steady_bounds();
        self.channels
            .iter()
            .map(|c| c.slice(start, end).expect("bounds checked on construction"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partials::Dynamic;

    #[test]
    fn steady_part_slices_every_channel() {
        let ctx = NoteContext::new(69, 442.0, Dynamic::Ff, (2, 5)).unwrap();
        let ch = TimeSignal::new((0..8).map(f64::from).collect(), 8.0).unwrap();
        let rec = RecordingSet::new(vec![ch; 3], ctx).unwrap();
        let steady = rec.steady_part();
        assert_eq!(steady.len(), 3);
        assert_eq!(steady[1].samples(), &[2.0, 3.0, 4.0]);
    }

    #[test]
    fn rejects_inconsistent_channels() {
        let ctx = NoteContext::new(69, 442.0, Dynamic::Ff, (0, 4)).unwrap();
        let a = TimeSignal::new(vec![0.0; 8], 8.0).unwrap();
        let b = TimeSignal::new(vec![0.0; 7], 8.0).unwrap();
        assert!(RecordingSet::new(vec![a.clone(), b], ctx).is_err());
        assert!(RecordingSet::new(vec![], ctx).is_err());
        let late = NoteContext::new(69, 442.0, Dynamic::Ff, (0, 9)).unwrap();
        assert!(RecordingSet::new(vec![a], late).is_err());
    }
}
