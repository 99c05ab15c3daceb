//! File names of the three document kinds plus DAFF and FIR bank files.
//!
//! | kind          | scheme                                   |
//! |---------------|------------------------------------------|
//! | recordings    | `{source}_{dynamic}_{midi}_recordings`    |
//! | single note   | `{source}_{midi}_singleTones`             |
//! | third octave  | `{source}_3rdOctave`                      |
//! | DAFF balloon  | `{source}`                                |
//! | FIR bank      | `{source}_FIR`                            |
//!
//! Source names may contain underscores; names are parsed from the right.

use std::fmt;

use crate::error::{Error, Result};
use crate::partials::Dynamic;

use super::DocumentKind;

pub const DOCUMENT_EXTENSION: &str = "sofalite";
pub const DAFF_EXTENSION: &str = "daff";
pub const FIR_BANK_EXTENSION: &str = "firbank";

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DocumentName {
    pub source_name: String,
    pub kind: DocumentKind,
    /// Present for recordings only.
    pub dynamic: Option<Dynamic>,
    /// Present for recordings and single-note documents.
    pub midi_note: Option<u8>,
}

impl DocumentName {
    pub fn recordings(source_name: &str, dynamic: Dynamic, midi_note: u8) -> Result<Self> {
        Self::checked(
            source_name,
            DocumentKind::Recordings,
            Some(dynamic),
            Some(midi_note),
        )
    }

    pub fn single_note(source_name: &str, midi_note: u8) -> Result<Self> {
        Self::checked(source_name, DocumentKind::SingleNote, None, Some(midi_note))
    }

    pub fn third_octave(source_name: &str) -> Result<Self> {
        Self::checked(source_name, DocumentKind::ThirdOctave, None, None)
    }

    fn checked(
        source_name: &str,
        kind: DocumentKind,
        dynamic: Option<Dynamic>,
        midi_note: Option<u8>,
    ) -> Result<Self> {
        check_source_name(source_name)?;
        if midi_note.is_some_and(|m| m > 127) {
            return Err(Error::BadFileName(format!("MIDI note {midi_note:?} > 127")));
        }
        Ok(Self {
            source_name: source_name.to_owned(),
            kind,
            dynamic,
            midi_note,
        })
    }

    /// File name including the `.sofalite` extension.
    pub fn file_name(&self) -> String {
        format!("{self}.{DOCUMENT_EXTENSION}")
    }

    /// Inverse of [`DocumentName::file_name`]; the extension is optional.
    pub fn parse(name: &str) -> Result<Self> {
        let bad = || Error::BadFileName(name.to_owned());
        let stem = name
            .strip_suffix(&format!(".{DOCUMENT_EXTENSION}"))
            .unwrap_or(name);
        if let Some(rest) = stem.strip_suffix("_recordings") {
            let (rest, midi) = rest.rsplit_once('_').ok_or_else(bad)?;
            let (source, dynamic) = rest.rsplit_once('_').ok_or_else(bad)?;
            let dynamic = dynamic.parse().map_err(|_| bad())?;
            Self::recordings(source, dynamic, parse_midi(midi).ok_or_else(bad)?)
        } else if let Some(rest) = stem.strip_suffix("_singleTones") {
            let (source, midi) = rest.rsplit_once('_').ok_or_else(bad)?;
            Self::single_note(source, parse_midi(midi).ok_or_else(bad)?)
        } else if let Some(source) = stem.strip_suffix("_3rdOctave") {
            Self::third_octave(source)
        } else {
            Err(bad())
        }
    }
}

impl fmt::Display for DocumentName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = &self.source_name;
        match (self.kind, self.dynamic, self.midi_note) {
            (DocumentKind::Recordings, Some(d), Some(m)) => write!(f, "{s}_{d}_{m}_recordings"),
            (DocumentKind::SingleNote, _, Some(m)) => write!(f, "{s}_{m}_singleTones"),
            _ => write!(f, "{s}_3rdOctave"),
        }
    }
}

/// Canonical decimal only, so that names parse back to the same string.
fn parse_midi(s: &str) -> Option<u8> {
    let m: u8 = s.parse().ok()?;
    (m <= 127 && m.to_string() == s).then_some(m)
}

pub fn check_source_name(name: &str) -> Result<()> {
    if name.is_empty() {
        return Err(Error::BadFileName("empty source name".into()));
    }
    if let Some(c) = name
        .chars()
        .find(|c| matches!(c, '/' | '\\' | '\0' | '.') || c.is_control())
    {
        return Err(Error::BadFileName(format!(
            "source name {name:?} contains {c:?}"
        )));
    }
    Ok(())
}

pub fn daff_file_name(source_name: &str) -> Result<String> {
    check_source_name(source_name)?;
    Ok(format!("{source_name}.{DAFF_EXTENSION}"))
}

pub fn fir_bank_file_name(source_name: &str) -> Result<String> {
    check_source_name(source_name)?;
    Ok(format!("{source_name}_FIR.{FIR_BANK_EXTENSION}"))
}
