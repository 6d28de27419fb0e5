// ISO 15919 romanization of Hindi, Bengali and Tamil text.

use std::error::Error;

use xltransfer::translit::{transliterate, Script, ScriptTable};

pub fn run_example() -> Result<String, Box<dyn Error>> {
    let mut out = String::new();
    for (text, script) in [
        ("क्या रविवार को सूरज निकलेगा", Script::Devanagari),
        ("আমি বাংলা ভাষা", Script::Bengali),
        ("ஞாயிற்றுக்கிழமை வெயில் இருக்குமா", Script::Tamil),
    ] {
        out.push_str(&format!("{script}: {} -> {}\n", text, transliterate(text, script)));
    }
    // Codepoints the table does not cover pass through with a warning.
    let t = ScriptTable::bundled(Script::Devanagari).transliterate("डॉ॰ शर्मा");
    out.push_str(&format!("with warnings: {} {:?}\n", t.text, t.warnings));
    Ok(out)
}

fn main() -> Result<(), Box<dyn Error>> {
    print!("{}", run_example()?);
    Ok(())
}
