"""Generates the ISO 15919 script tables under crates/core/resources/translit/."""
import sys, unicodedata, pathlib

N = lambda s: unicodedata.normalize("NFC", s)

DEVANAGARI = {
    "consonant": {
        "क": "k", "ख": "kh", "ग": "g", "घ": "gh", "ङ": "ṅ",
        "च": "c", "छ": "ch", "ज": "j", "झ": "jh", "ञ": "ñ",
        "ट": "ṭ", "ठ": "ṭh", "ड": "ḍ", "ढ": "ḍh", "ण": "ṇ",
        "त": "t", "थ": "th", "द": "d", "ध": "dh", "न": "n", "ऩ": "ṉ",
        "प": "p", "फ": "ph", "ब": "b", "भ": "bh", "म": "m",
        "य": "y", "र": "r", "ऱ": "ṟ", "ल": "l", "ळ": "ḷ", "ऴ": "ḻ", "व": "v",
        "श": "ś", "ष": "ṣ", "स": "s", "ह": "h",
        "क़": "q", "ख़": "k͟h", "ग़": "ġ", "ज़": "z", "ड़": "ṛ", "ढ़": "ṛh", "फ़": "f", "य़": "ẏ",
    },
    "independent_vowel": {
        "अ": "a", "आ": "ā", "इ": "i", "ई": "ī", "उ": "u", "ऊ": "ū",
        "ऋ": "r̥", "ॠ": "r̥̄", "ऌ": "l̥", "ॡ": "l̥̄",
        "ऍ": "ê", "ऎ": "e", "ए": "ē", "ऐ": "ai", "ऑ": "ô", "ऒ": "o", "ओ": "ō", "औ": "au",
    },
    "vowel_sign": {
        "ा": "ā", "ि": "i", "ी": "ī", "ु": "u", "ू": "ū", "ृ": "r̥", "ॄ": "r̥̄",
        "ॢ": "l̥", "ॣ": "l̥̄", "ॅ": "ê", "ॆ": "e", "े": "ē", "ै": "ai", "ॉ": "ô", "ॊ": "o", "ो": "ō", "ौ": "au",
    },
    "sign": {"ं": "ṁ", "ः": "ḥ", "ँ": "m̐", "ऽ": "’", "ॐ": "ōṁ"},
    "virama": {"्": ""},
    "nukta": {"़": ""},
    "punct": {"।": ".", "॥": ".."},
    "digit": {chr(0x0966 + i): str(i) for i in range(10)},
}

BENGALI = {
    "consonant": {
        "ক": "k", "খ": "kh", "গ": "g", "ঘ": "gh", "ঙ": "ṅ",
        "চ": "c", "ছ": "ch", "জ": "j", "ঝ": "jh", "ঞ": "ñ",
        "ট": "ṭ", "ঠ": "ṭh", "ড": "ḍ", "ঢ": "ḍh", "ণ": "ṇ",
        "ত": "t", "থ": "th", "দ": "d", "ধ": "dh", "ন": "n",
        "প": "p", "ফ": "ph", "ব": "b", "ভ": "bh", "ম": "m",
        "য": "y", "র": "r", "ল": "l", "শ": "ś", "ষ": "ṣ", "স": "s", "হ": "h",
        "ড়": "ṛ", "ঢ়": "ṛh", "য়": "ẏ",
    },
    "dead_consonant": {"ৎ": "t"},
    "independent_vowel": {
        "অ": "a", "আ": "ā", "ই": "i", "ঈ": "ī", "উ": "u", "ঊ": "ū",
        "ঋ": "r̥", "ৠ": "r̥̄", "ঌ": "l̥", "ৡ": "l̥̄", "এ": "ē", "ঐ": "ai", "ও": "ō", "ঔ": "au",
    },
    "vowel_sign": {
        "া": "ā", "ি": "i", "ী": "ī", "ু": "u", "ূ": "ū", "ৃ": "r̥", "ৄ": "r̥̄",
        "ৢ": "l̥", "ৣ": "l̥̄", "ে": "ē", "ৈ": "ai", "ো": "ō", "ৌ": "au",
    },
    "sign": {"ং": "ṁ", "ঃ": "ḥ", "ঁ": "m̐", "ঽ": "’"},
    "virama": {"্": ""},
    "nukta": {"়": ""},
    "digit": {chr(0x09E6 + i): str(i) for i in range(10)},
}

TAMIL = {
    "consonant": {
        "க": "k", "ங": "ṅ", "ச": "c", "ஞ": "ñ", "ட": "ṭ", "ண": "ṇ",
        "த": "t", "ந": "n", "ப": "p", "ம": "m", "ய": "y", "ர": "r",
        "ல": "l", "வ": "v", "ழ": "ḻ", "ள": "ḷ", "ற": "ṟ", "ன": "ṉ",
        "ஜ": "j", "ஶ": "ś", "ஷ": "ṣ", "ஸ": "s", "ஹ": "h",
    },
    "independent_vowel": {
        "அ": "a", "ஆ": "ā", "இ": "i", "ஈ": "ī", "உ": "u", "ஊ": "ū",
        "எ": "e", "ஏ": "ē", "ஐ": "ai", "ஒ": "o", "ஓ": "ō", "ஔ": "au",
    },
    "vowel_sign": {
        "ா": "ā", "ி": "i", "ீ": "ī", "ு": "u", "ூ": "ū",
        "ெ": "e", "ே": "ē", "ை": "ai", "ொ": "o", "ோ": "ō", "ௌ": "au",
    },
    "sign": {"ஃ": "ḵ", "ஂ": "ṁ"},
    "virama": {"்": ""},
    "digit": {chr(0x0BE6 + i): str(i) for i in range(10)},
}

# Precomposed nukta letters are composition exclusions: NFC decomposes them,
# so they are listed explicitly next to their decomposed sequences.
PRECOMPOSED = {
    "devanagari": {"\u0958": "q", "\u0959": "k͟h", "\u095A": "ġ", "\u095B": "z",
                   "\u095C": "ṛ", "\u095D": "ṛh", "\u095E": "f", "\u095F": "ẏ"},
    "bengali": {"\u09DC": "ṛ", "\u09DD": "ṛh", "\u09DF": "ẏ"},
    "tamil": {},
}

def cps(s):
    return " ".join(f"U+{ord(c):04X}" for c in s)

def write(name, table, out_dir):
    lines = ["# codepoints\tlatin\tcategory"]
    seen = set()
    for cat, m in table.items():
        for k, v in m.items():
            for key in {k, N(k), unicodedata.normalize("NFD", k)}:
                if key in seen:
                    continue
                seen.add(key)
                lines.append(f"{cps(key)}\t{N(v)}\t{cat}")
    for k, v in PRECOMPOSED[name].items():
        if k not in seen:
            seen.add(k)
            lines.append(f"{cps(k)}\t{N(v)}\tconsonant")
    (out_dir / f"{name}.tsv").write_text("\n".join(lines) + "\n", encoding="utf-8")

if __name__ == "__main__":
    out = pathlib.Path(sys.argv[1])
    out.mkdir(parents=True, exist_ok=True)
    write("devanagari", DEVANAGARI, out)
    write("bengali", BENGALI, out)
    write("tamil", TAMIL, out)
