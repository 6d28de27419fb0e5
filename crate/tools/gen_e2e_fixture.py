"""Builds the English/Hindi pipeline fixture under crates/core/tests/fixtures/e2e/.

Sentences are assembled from templates whose word correspondences are known,
so the Pharaoh file holds true alignments: every labeled Hindi token links to
the English token carrying the same label. Projecting English gold labels
through these links reproduces the Hindi gold exactly.
"""
import json
import pathlib
import random

FILLERS = {
    "date": [("sunday", "रविवार"), ("monday", "सोमवार"), ("tomorrow", "कल"), ("today", "आज")],
    "time": [("five am", "सुबह पाँच"), ("six pm", "शाम छह"), ("noon", "दोपहर")],
    "weather_descriptor": [("sun", "धूप"), ("rain", "बारिश"), ("snow", "बर्फ")],
    "place_name": [("delhi", "दिल्ली"), ("mumbai", "मुंबई"), ("paris", "पेरिस")],
    "person": [("ravi", "रवि"), ("asha", "आशा"), ("meera", "मीरा")],
    "event_name": [("meeting", "बैठक"), ("party", "पार्टी")],
}

# (english items, hindi items, frame links); "{x}" is a slot placeholder.
TEMPLATES = [
    ("will it be {weather_descriptor} on {date}", "क्या {date} को {weather_descriptor} होगी", [("on", "को")]),
    ("wake me up at {time}", "मुझे {time} बजे उठाना", [("me", "मुझे")]),
    ("what is the weather in {place_name} {date}", "{date} {place_name} में मौसम कैसा है", [("in", "में"), ("weather", "मौसम")]),
    ("remind me to call {person} {date}", "{date} {person} को फोन करने की याद दिलाना", [("call", "फोन")]),
    ("set the {event_name} with {person} at {time}", "{person} के साथ {time} बजे {event_name} रखो", [("with", "साथ")]),
    ("is there {weather_descriptor} in {place_name}", "क्या {place_name} में {weather_descriptor} है", [("in", "में")]),
]
NO_SLOTS = ("hello how are you", "नमस्ते आप कैसे हैं", [("hello", "नमस्ते"), ("you", "आप")])


def expand(template, choice):
    """Returns tokens, labels and, per token, a concept key shared across languages."""
    tokens, labels, keys = [], [], []
    for item in template.split():
        if item.startswith("{"):
            label = item[1:-1]
            words = choice[label].split()
            for k, w in enumerate(words):
                tokens.append(w)
                labels.append(label)
                keys.append((label, k))
        else:
            tokens.append(item)
            labels.append(None)
            keys.append(None)
    return tokens, labels, keys


def annotate(tokens, labels):
    out, i = [], 0
    while i < len(tokens):
        if labels[i] is None:
            out.append(tokens[i])
            i += 1
            continue
        j = i
        while j < len(tokens) and labels[j] == labels[i]:
            j += 1
        out.append(f"[{labels[i]} : {' '.join(tokens[i:j])}]")
        i = j
    return " ".join(out)


def build(rng, template, partition, idx):
    en_t, hi_t, frame = template
    en_fill, hi_fill = {}, {}
    for label, pairs in FILLERS.items():
        en, hi = rng.choice(pairs)
        en_fill[label], hi_fill[label] = en, hi
    en_tok, en_lab, en_key = expand(en_t, en_fill)
    hi_tok, hi_lab, hi_key = expand(hi_t, hi_fill)
    assert len(en_fill["time"].split()) == len(hi_fill["time"].split()) or "{time}" not in en_t
    links = set()
    for j, key in enumerate(hi_key):
        if key is not None:
            links.add((en_key.index(key), j))
    for en_w, hi_w in frame:
        links.add((en_tok.index(en_w), hi_tok.index(hi_w)))
    rid = f"{idx:04d}"
    recs = [
        {"id": rid, "locale": "en-US", "partition": partition, "utt": " ".join(en_tok), "annot_utt": annotate(en_tok, en_lab)},
        {"id": rid, "locale": "hi-IN", "partition": partition, "utt": " ".join(hi_tok), "annot_utt": annotate(hi_tok, hi_lab)},
    ]
    return recs, " ".join(f"{s}-{t}" for s, t in sorted(links))


def main():
    rng = random.Random(7)
    # Equal token counts for multi-word fillers keep slot links one-to-one.
    FILLERS["time"] = [p for p in FILLERS["time"] if len(p[0].split()) == len(p[1].split())]
    plan = [("train", i) for i in range(20)] + [("test", i) for i in range(50)]
    records, pharaoh = [], []
    for n, (partition, i) in enumerate(plan):
        recs, line = build(rng, TEMPLATES[n % len(TEMPLATES)], partition, n)
        records.extend(recs)
        pharaoh.append(line)
    # One unlabeled test pair, dropped by the labeled-test filter.
    recs, line = build(rng, NO_SLOTS, "test", len(plan))
    records.extend(recs)
    pharaoh.append(line)

    dest = pathlib.Path(__file__).resolve().parent.parent / "crates/core/tests/fixtures/e2e"
    dest.mkdir(parents=True, exist_ok=True)
    with open(dest / "massive.jsonl", "w", encoding="utf-8") as f:
        for r in records:
            f.write(json.dumps(r, ensure_ascii=False) + "\n")
    with open(dest / "alignments.pharaoh", "w") as f:
        f.write("\n".join(pharaoh) + "\n")
    with open(dest / "embeddings.jsonl", "w") as f:
        for n in range(len(plan) + 1):
            vec = [round(rng.uniform(-1, 1), 6) for _ in range(8)]
            f.write(json.dumps({"id": f"{n:04d}", "vector": vec}) + "\n")
    config = {
        "task": "slot_filling",
        "source_locale": "en-US",
        "target_locale": "hi-IN",
        "mode": "icl",
        "variant_tags": ["handholding"],
        "corpus": {"format": "massive", "source": "massive.jsonl", "target": "massive.jsonl"},
        "alignment": {"method": "pharaoh", "path": "alignments.pharaoh"},
        "embeddings": "embeddings.jsonl",
        "generation": {"endpoint": "mock:project"},
        "oracle_source": True,
        "seed": 13,
        "output_dir": "out",
    }
    with open(dest / "config.json", "w") as f:
        f.write(json.dumps(config, indent=2) + "\n")
    print(len(plan) + 1, "pairs")


if __name__ == "__main__":
    main()
