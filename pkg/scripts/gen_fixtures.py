#!/usr/bin/env python3
"""Regenerate the shipped test fixtures (deterministic, offline).

Produces, under tests/fixtures/:

- fixture_run/: a five-system round-trip evaluation scenario (sources,
  per-system outputs of graded quality, human judgments, ranking pairs,
  run config) plus a sentence/wordpiece embedding fixture covering every
  text in the scenario.
- paws_qqp_200.tsv: a 200-pair paraphrase-identification subset with high
  lexical overlap in both classes (paraphrases are reorders / synonym
  substitutions; non-paraphrases are meaning flips), ~43% positives.
- paws_embeddings.jsonl + paws_config.toml: embeddings and provider config
  for scoring the paraphrase subset offline.

Embeddings come from a bag-of-synonym-class featurizer: each wordpiece maps
to a class vector plus a small piece-specific offset, sentences average
their piece vectors with a light positional component.  Each sentence is
embedded independently (labels are never consulted), so metric behavior on
the fixtures is a property of the data construction, not of the encoder.
"""

import functools
import hashlib
import json
import random
from pathlib import Path

import numpy as np

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"
DIM = 48

SYNONYM_CLASSES = [
    ["quick", "fast", "rapid", "swift"],
    ["big", "large", "huge"],
    ["small", "little", "tiny"],
    ["begin", "start", "commence"],
    ["buy", "purchase", "acquire"],
    ["road", "street", "avenue"],
    ["city", "town"],
    ["house", "home"],
    ["help", "assist"],
    ["build", "construct"],
    ["old", "ancient"],
    ["new", "modern"],
    ["famous", "renowned"],
    ["report", "study"],
    ["finish", "complete"],
    ["storm", "tempest"],
    ["enjoy", "like"],
    ["strong", "robust"],
    ["promise", "pledge"],
    ["damage", "harm"],
    ["detailed", "thorough"],
    ["annual", "yearly"],
    ["approve", "endorse"],
    ["approved", "endorsed"],
    ["expect", "anticipate"],
    ["published", "released"],
    ["instantly", "immediately"],
    ["behaviour", "behavior"],
]

_CLASS_OF = {}
for group in SYNONYM_CLASSES:
    for word in group:
        _CLASS_OF[word] = group[0]


@functools.lru_cache(maxsize=None)
def _seeded_unit(seed_text):
    digest = hashlib.sha256(seed_text.encode("utf-8")).digest()
    rng = np.random.RandomState(int.from_bytes(digest[:4], "big"))
    return rng.standard_normal(DIM)


def _seeded_vector(seed_text, scale=1.0):
    return scale * _seeded_unit(seed_text)


def wordpieces(text):
    """Lowercased wordpiece-style split: punctuation isolated, long words halved."""
    pieces = []
    for raw in text.lower().split():
        core = raw
        trailing = []
        while core and not core[-1].isalnum():
            trailing.append(core[-1])
            core = core[:-1]
        leading = []
        while core and not core[0].isalnum():
            leading.append(core[0])
            core = core[1:]
        pieces.extend(leading)
        if core:
            if len(core) > 7:
                pieces.append(core[:4])
                pieces.append("##" + core[4:])
            else:
                pieces.append(core)
        pieces.extend(reversed(trailing))
    return pieces


def piece_vector(piece):
    base_key = piece[2:] if piece.startswith("##") else piece
    class_key = _CLASS_OF.get(base_key, base_key)
    prefix = "##" if piece.startswith("##") else ""
    base = _seeded_vector("class:" + prefix + class_key)
    jitter = _seeded_vector("piece:" + piece, scale=0.15)
    return base + jitter


def sentence_vector(text):
    pieces = wordpieces(text)
    if not pieces:
        return np.zeros(DIM)
    acc = np.zeros(DIM)
    for position, piece in enumerate(pieces):
        acc += piece_vector(piece)
        acc += _seeded_vector(f"pos:{position}:{piece}", scale=0.03)
    return acc / len(pieces)


def embedding_record(text):
    pieces = wordpieces(text)
    return {
        "text": text,
        "sentence_vector": [float(x) for x in sentence_vector(text)],
        "wordpieces": pieces,
        "token_vectors": [[float(x) for x in piece_vector(p)] for p in pieces],
    }


def write_embeddings(texts, path):
    seen = set()
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(json.dumps({"format_version": 1, "encoder": "bag-of-class-v1"}) + "\n")
        for text in texts:
            if text in seen:
                continue
            seen.add(text)
            handle.write(json.dumps(embedding_record(text), ensure_ascii=False) + "\n")


# ---------------------------------------------------------------------------
# Five-system round-trip scenario
# ---------------------------------------------------------------------------

SOURCES = [
    "The committee approved the annual budget on Friday.",
    "A quick storm damaged several small boats in the harbor.",
    "Local researchers published a detailed report about river pollution.",
    "The new library will open near the central station next year.",
    "Farmers expect a strong harvest despite the dry summer.",
    "The mayor promised to build a modern hospital in the district.",
    "Engineers finished the bridge two months ahead of schedule.",
    "Tourists enjoy the old castle and its famous garden.",
]

_SYNONYMS = {w: [s for s in group if s != w] for group in SYNONYM_CLASSES for w in group}
_OFF_CLASS = [
    "committee", "harbor", "pollution", "station", "harvest", "district",
    "schedule", "garden", "window", "engine", "market", "winter",
]


def _swap_synonyms(words, rng, count):
    out = list(words)
    candidates = [i for i, w in enumerate(out) if w.lower().strip(".,") in _SYNONYMS]
    rng.shuffle(candidates)
    for i in candidates[:count]:
        bare = out[i].lower().strip(".,")
        tail = out[i][len(bare):] if out[i].lower().startswith(bare) else ""
        replacement = rng.choice(_SYNONYMS[bare])
        if out[i][0].isupper():
            replacement = replacement.capitalize()
        out[i] = replacement + tail
    return out


def _degrade(words, rng, replacements, drop=0, reorder=False):
    out = list(words)
    for _ in range(replacements):
        i = rng.randrange(len(out))
        out[i] = rng.choice(_OFF_CLASS)
    for _ in range(drop):
        if len(out) > 3:
            del out[rng.randrange(len(out))]
    if reorder and len(out) > 4:
        i = rng.randrange(1, len(out) - 2)
        out[i], out[i + 1] = out[i + 1], out[i]
    return out


def make_fixture_run():
    run_dir = FIXTURES / "fixture_run"
    (run_dir / "outputs").mkdir(parents=True, exist_ok=True)
    rng = random.Random(7041)

    systems = {}
    systems["sysA"] = list(SOURCES)
    systems["sysB"] = [" ".join(_swap_synonyms(s.split(), rng, 1)) for s in SOURCES]
    systems["sysC"] = [" ".join(_swap_synonyms(s.split(), rng, 3)) for s in SOURCES]
    systems["sysD"] = [
        " ".join(_degrade(_swap_synonyms(s.split(), rng, 2), rng, 1, reorder=True))
        for s in SOURCES
    ]
    systems["sysE"] = [
        " ".join(_degrade(s.split(), rng, 3, drop=2, reorder=True)) for s in SOURCES
    ]

    (run_dir / "sources.txt").write_text("\n".join(SOURCES) + "\n", encoding="utf-8")
    for system_id, outputs in systems.items():
        (run_dir / "outputs" / f"{system_id}.txt").write_text(
            "\n".join(outputs) + "\n", encoding="utf-8"
        )

    da = {"sysA": 0.71, "sysB": 0.29, "sysC": 0.04, "sysD": -0.38, "sysE": -0.66}
    (run_dir / "da.csv").write_text(
        "".join(f"{system},{score}\n" for system, score in da.items()), encoding="utf-8"
    )

    ordering = ["sysA", "sysB", "sysC", "sysD", "sysE"]
    darr_lines = []
    for segment in range(1, len(SOURCES) + 1):
        darr_lines.append(f"{segment} sysA sysC")
        darr_lines.append(f"{segment} sysB sysD")
        darr_lines.append(f"{segment} sysC sysE")
        if segment % 3 == 0:  # a few noisy inversions, as in real judgments
            darr_lines.append(f"{segment} sysD sysB")
        else:
            darr_lines.append(f"{segment} sysA sysE")
    (run_dir / "darr.tsv").write_text("\n".join(darr_lines) + "\n", encoding="utf-8")

    config = """format_version = 1

[testset]
src_lang = "en"
tgt_lang = "de"
sources = "sources.txt"

[[submissions]]
system_id = "sysA"
outputs = "outputs/sysA.txt"

[[submissions]]
system_id = "sysB"
outputs = "outputs/sysB.txt"

[[submissions]]
system_id = "sysC"
outputs = "outputs/sysC.txt"

[[submissions]]
system_id = "sysD"
outputs = "outputs/sysD.txt"

[[submissions]]
system_id = "sysE"
outputs = "outputs/sysE.txt"

[bt]
provider_id = "echo-bt"
endpoint = "echo:"

[embeddings.sentence.en]
provider_id = "fixture-sent"
endpoint = "fixture:embeddings.jsonl"

[embeddings.token]
provider_id = "fixture-tok"
endpoint = "fixture:embeddings.jsonl"

[run]
output_dir = "runs"
cache_dir = "cache"
metrics = ["rtt-bleu", "rtt-sentbleu", "rtt-chrf", "rtt-sbert", "rtt-bertscore"]
"""
    (run_dir / "config.toml").write_text(config, encoding="utf-8")

    texts = list(SOURCES)
    for outputs in systems.values():
        texts.extend(outputs)
    write_embeddings(texts, run_dir / "embeddings.jsonl")
    print(f"fixture_run: {len(SOURCES)} segments x {len(systems)} systems")
    return ordering


# ---------------------------------------------------------------------------
# Paraphrase-identification subset
# ---------------------------------------------------------------------------

TOWNS = ["Sandanski", "Hisarya", "Kyustendil", "Devin", "Bankya", "Varshets", "Velingrad", "Pernik"]
NAMES = ["Deanna", "Martin", "Sofia", "Harlan", "Quinn", "Mercer", "Odette", "Bram"]
COMPANIES = ["Altera", "Borune", "Corvex", "Dynatech", "Ebstrom", "Falkor"]
THINGS = ["tower", "bridge", "museum", "stadium", "terminal", "observatory"]
DIRECTIONS = ["northern", "southern", "eastern", "western"]
VERB_FLIPS = [("opened", "closed"), ("increase", "decrease"), ("won", "lost"),
              ("raised", "lowered"), ("entered", "left"), ("created", "conserved")]
REASONS = [
    ("the funding was cut", "the project was delayed"),
    ("the river flooded", "the road was closed"),
    ("the vote failed", "the plan was abandoned"),
    ("the engine overheated", "the train was stopped"),
]
MONTHS = [
    "January", "February", "March", "April", "May", "June",
    "July", "August", "September", "October", "November", "December",
]


def gen_list_reorder(rng, idx):
    items = rng.sample(TOWNS, 6)
    s1 = f"Other famous spa towns include {items[0]} , {items[1]} , {items[2]} , {items[3]} , {items[4]} and {items[5]} ."
    moved = items[1:4]
    rotated = [moved[-1]] + moved[:-1]
    reordered = [items[0]] + rotated + items[4:]
    s2 = f"Other famous spa towns include {reordered[0]} , {reordered[1]} , {reordered[2]} , {reordered[3]} , {reordered[4]} and {reordered[5]} ."
    return s1, s2, 1


def gen_clause_swap(rng, idx):
    cause, effect = REASONS[idx % len(REASONS)]
    month = MONTHS[(idx // len(REASONS)) % len(MONTHS)]
    s1 = f"{effect.capitalize()} in {month} because {cause} ."
    s2 = f"Because {cause} , {effect} in {month} ."
    return s1, s2, 1


_SYN_TEMPLATES = [
    "The {a} driver will {b} a {c} house near the {d} .",
    "A {a} worker helped {b} the {c} hall on the {d} .",
    "The {a} mayor made a {c} promise about the {d} .",
]


def gen_synonym_sub(rng, idx):
    groups = rng.sample([g for g in SYNONYM_CLASSES if len(g) >= 2], 4)
    w1 = [rng.choice(g) for g in groups]
    w2 = []
    for group, word in zip(groups, w1):
        alternatives = [s for s in group if s != word]
        w2.append(rng.choice(alternatives))
    name = rng.choice(NAMES)
    s1 = f"{name} said the {w1[0]} plan would {w1[1]} the {w1[2]} market on the {w1[3]} side ."
    s2 = f"{name} said the {w2[0]} plan would {w2[1]} the {w2[2]} market on the {w2[3]} side ."
    return s1, s2, 1


def gen_agreement_flip(rng, idx):
    name = NAMES[idx % len(NAMES)]
    episode = 2 + (idx // len(NAMES)) % 7
    s1 = (f"What was the song that {name} and family were listening to at the beginning "
          f"of episode {episode} and why was they listening to it ?")
    s2 = (f"What was the song that {name} and family was listening to at the beginning "
          f"of episode {episode} and why were they listening to it ?")
    return s1, s2, 1


def gen_content_flip(rng, idx):
    thing = rng.choice(THINGS)
    d1, d2 = rng.sample(DIRECTIONS, 2)
    year = rng.randrange(1950, 2019)
    kind = idx % 2
    if kind == 0:
        s1 = f"The {d1} {thing} is the first new {thing} to be built at the {d1} end of the city in {year} ."
        s2 = f"The {d1} {thing} is the first new {thing} to be built at the {d2} end of the city in {year} ."
    else:
        v1, v2 = rng.choice(VERB_FLIPS)
        name = rng.choice(COMPANIES)
        s1 = f"The {name} {thing} {v1} to the public in {year} after a long campaign ."
        s2 = f"The {name} {thing} {v2} to the public in {year} after a long campaign ."
    return s1, s2, 0


def gen_number_flip(rng, idx):
    thing = rng.choice(THINGS)
    n1 = rng.randrange(110, 980)
    digits = list(str(n1))
    digits[0], digits[-1] = digits[-1], digits[0]
    n2 = int("".join(digits))
    if n2 == n1:
        n2 = n1 + 110
    s1 = f"The {thing} is {n1} meters tall and took nine years to build ."
    s2 = f"The {thing} is {n2} meters tall and took nine years to build ."
    return s1, s2, 0


def gen_role_swap(rng, idx):
    a, b = rng.sample(COMPANIES, 2)
    year = rng.randrange(1988, 2018)
    s1 = f"{a} acquired {b} in {year} for an undisclosed sum ."
    s2 = f"{b} acquired {a} in {year} for an undisclosed sum ."
    return s1, s2, 0


_QUALIFIER_SUBJECTS = ["dark energy", "vacuum energy", "latent heat", "angular momentum"]


def gen_qualifier_swap(rng, idx):
    subject = _QUALIFIER_SUBJECTS[idx % len(_QUALIFIER_SUBJECTS)]
    v1, v2 = VERB_FLIPS[(idx // len(_QUALIFIER_SUBJECTS)) % len(VERB_FLIPS)]
    s1 = f"How is {subject} {v1} with the universe conserved if it is not {v2} ? Can infinite of these be {v2} ?"
    s2 = f"How is {subject} {v2} with the universe conserved if it is not {v1} ? Can infinite of these be {v1} ?"
    return s1, s2, 0


def make_paws_subset():
    rng = random.Random(20200214)
    plan = (
        [gen_list_reorder] * 30
        + [gen_clause_swap] * 20
        + [gen_synonym_sub] * 26
        + [gen_agreement_flip] * 10
        + [gen_content_flip] * 60
        + [gen_number_flip] * 34
        + [gen_role_swap] * 12
        + [gen_qualifier_swap] * 8
    )
    rows = []
    seen = set()
    for idx, gen in enumerate(plan):
        for attempt in range(500):
            s1, s2, label = gen(rng, idx)
            if (s1, s2) not in seen:
                break
        else:
            raise RuntimeError(f"could not generate a fresh pair for {gen.__name__}")
        seen.add((s1, s2))
        rows.append((str(idx + 1), s1, s2, label))
    assert len(rows) == 200
    positives = sum(label for _, _, _, label in rows)
    print(f"paws subset: {len(rows)} pairs, {positives} positives")

    with open(FIXTURES / "paws_qqp_200.tsv", "w", encoding="utf-8") as handle:
        handle.write("id\tsentence1\tsentence2\tlabel\n")
        for row_id, s1, s2, label in rows:
            handle.write(f"{row_id}\t{s1}\t{s2}\t{label}\n")

    texts = []
    for _, s1, s2, _ in rows:
        texts.append(s1)
        texts.append(s2)
    write_embeddings(texts, FIXTURES / "paws_embeddings.jsonl")

    config = """format_version = 1

[embeddings.sentence.en]
provider_id = "fixture-sent"
endpoint = "fixture:paws_embeddings.jsonl"

[embeddings.token]
provider_id = "fixture-tok"
endpoint = "fixture:paws_embeddings.jsonl"
"""
    (FIXTURES / "paws_config.toml").write_text(config, encoding="utf-8")


if __name__ == "__main__":
    FIXTURES.mkdir(parents=True, exist_ok=True)
    make_fixture_run()
    make_paws_subset()
    print("fixtures written to", FIXTURES)
