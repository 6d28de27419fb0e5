"""Builds the romanization fixture tables under crates/core/tests/fixtures/translit/.

The expected strings are composed here from a single offset table shared by the
three Unicode Indic blocks (consonant + vowel sign / inherent a / virama), plus a
list of hand-checked words. Nothing is read from the crate's resource tables.
"""
import pathlib
import unicodedata

NFC = lambda s: unicodedata.normalize("NFC", s)

BASE = {"devanagari": 0x0900, "bengali": 0x0980, "tamil": 0x0B80}

CONSONANTS = {
    0x15: "k", 0x16: "kh", 0x17: "g", 0x18: "gh", 0x19: "ṅ",
    0x1A: "c", 0x1B: "ch", 0x1C: "j", 0x1D: "jh", 0x1E: "ñ",
    0x1F: "ṭ", 0x20: "ṭh", 0x21: "ḍ", 0x22: "ḍh", 0x23: "ṇ",
    0x24: "t", 0x25: "th", 0x26: "d", 0x27: "dh", 0x28: "n", 0x29: "ṉ",
    0x2A: "p", 0x2B: "ph", 0x2C: "b", 0x2D: "bh", 0x2E: "m",
    0x2F: "y", 0x30: "r", 0x31: "ṟ", 0x32: "l", 0x33: "ḷ", 0x34: "ḻ", 0x35: "v",
    0x36: "ś", 0x37: "ṣ", 0x38: "s", 0x39: "h",
}

VOWEL_SIGNS = {
    0x3E: "ā", 0x3F: "i", 0x40: "ī", 0x41: "u", 0x42: "ū", 0x43: "r̥", 0x44: "r̥̄",
    0x45: "ê", 0x46: "e", 0x47: "ē", 0x48: "ai", 0x49: "ô", 0x4A: "o", 0x4B: "ō", 0x4C: "au",
}

VIRAMA = 0x4D

# Bengali uses b for U+09AC; Tamil has no aspirates or voiced stops in its
# native set, and the letters below are the ones Unicode assigns.
SCRIPT_CONSONANTS = {
    "devanagari": {o: l for o, l in CONSONANTS.items()},
    "bengali": {o: ("b" if o == 0x2C else l) for o, l in CONSONANTS.items()
                if o not in (0x29, 0x31, 0x33, 0x34, 0x35)},
    "tamil": {o: l for o, l in CONSONANTS.items()
              if o in (0x15, 0x19, 0x1A, 0x1C, 0x1E, 0x1F, 0x23, 0x24, 0x28, 0x29, 0x2A, 0x2E,
                       0x2F, 0x30, 0x31, 0x32, 0x33, 0x34, 0x35, 0x36, 0x37, 0x38, 0x39)},
}

SCRIPT_SIGNS = {
    "devanagari": list(VOWEL_SIGNS),
    "bengali": [0x3E, 0x3F, 0x40, 0x41, 0x42, 0x43, 0x44, 0x47, 0x48, 0x4B, 0x4C],
    "tamil": [0x3E, 0x3F, 0x40, 0x41, 0x42, 0x46, 0x47, 0x48, 0x4A, 0x4B, 0x4C],
}

EXTRA = {
    "devanagari": [
        ("क़", "qa"), ("ख़", "k͟ha"), ("ग़", "ġa"), ("ज़", "za"),
        ("ड़", "ṛa"), ("ढ़", "ṛha"), ("फ़", "fa"), ("य़", "ẏa"),
        ("सूरज", "sūraja"), ("रविवार", "ravivāra"), ("हिन्दी", "hindī"),
        ("नमस्ते", "namastē"), ("संस्कृत", "saṁskr̥ta"), ("क्षत्रिय", "kṣatriya"),
        ("ज्ञान", "jñāna"), ("आदमी", "ādamī"), ("ऋषि", "r̥ṣi"), ("ओम्", "ōm"),
        ("दुःख", "duḥkha"), ("चाँद", "cām̐da"), ("२०२४", "2024"), ("क्या", "kyā"),
        ("निकलेगा", "nikalēgā"), ("ऑफ़िस", "ôfisa"), ("सोमवार", "sōmavāra"),
    ],
    "bengali": [
        ("বাংলা", "bāṁlā"), ("উৎসব", "utsaba"), ("কলকাতা", "kalakātā"),
        ("আমি", "āmi"), ("ভাষা", "bhāṣā"), ("রবিবার", "rabibāra"),
        ("সূর্য", "sūrya"), ("ঋতু", "r̥tu"), ("বৃষ্টি", "br̥ṣṭi"), ("ঐক্য", "aikya"),
        ("ঔষধ", "auṣadha"), ("দুঃখ", "duḥkha"), ("চাঁদ", "cām̐da"), ("১৯৭১", "1971"),
        ("ড়", "ṛa"), ("য়", "ẏa"), ("পড়া", "paṛā"),
    ],
    "tamil": [
        ("தமிழ்", "tamiḻ"), ("அஃது", "aḵtu"), ("கொடு", "koṭu"), ("சென்னை", "ceṉṉai"),
        ("வணக்கம்", "vaṇakkam"), ("ஞாயிற்றுக்கிழமை", "ñāyiṟṟukkiḻamai"),
        ("வெயில்", "veyil"), ("இருக்குமா", "irukkumā"), ("ஐந்து", "aintu"),
        ("ஔவை", "auvai"), ("ஊர்", "ūr"), ("ஏரி", "ēri"), ("ஒன்று", "oṉṟu"),
        ("ஓடு", "ōṭu"), ("எழுப்பு", "eḻuppu"), ("மணிக்கு", "maṇikku"),
    ],
}


def rows(script):
    base = BASE[script]
    out = []
    for off, latin in SCRIPT_CONSONANTS[script].items():
        c = chr(base + off)
        assert unicodedata.name(c, None), hex(base + off)
        out.append((c, latin + "a"))
        out.append((c + chr(base + VIRAMA), latin))
        for s in SCRIPT_SIGNS[script]:
            sign = chr(base + s)
            assert unicodedata.name(sign, None), hex(base + s)
            out.append((c + sign, latin + VOWEL_SIGNS[s]))
    out.extend(EXTRA[script])
    return [(NFC(i), NFC(e)) for i, e in out]


def main():
    root = pathlib.Path(__file__).resolve().parent.parent
    dest = root / "crates/core/tests/fixtures/translit"
    dest.mkdir(parents=True, exist_ok=True)
    for script in BASE:
        rs = rows(script)
        with open(dest / f"{script}.tsv", "w", encoding="utf-8") as f:
            f.write("# input\texpected\n")
            for i, e in rs:
                f.write(f"{i}\t{e}\n")
        print(script, len(rs))


if __name__ == "__main__":
    main()
