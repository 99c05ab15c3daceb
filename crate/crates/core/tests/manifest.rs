use std::path::Path;

use sonodir_core::pipeline::{Era, Manifest};

#[test]
fn documented_example_parses() {
    let text = include_str!("../../../docs/manifest.example.toml");
    let m = Manifest::from_toml(text, Path::new("/data/oboe")).unwrap();
    assert_eq!(m.instrument.era, Era::Modern);
    assert_eq!(m.notes.len(), 2);
    assert_eq!(m.output.fir_length, 8192);
    assert_eq!(
        m.wav_path(&m.notes[0]),
        Path::new("/data/oboe/wav/Oboe_modern_ff_69.wav")
    );
    let again = Manifest::from_toml(&m.to_toml(), Path::new("/data/oboe")).unwrap();
    assert_eq!(again, m);
}
