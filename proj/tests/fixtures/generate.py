#!/usr/bin/env python3
"""Regenerates the committed fixture files. Deterministic: reruns are byte-identical."""

import json
import random
from pathlib import Path

HERE = Path(__file__).resolve().parent


# ---------------------------------------------------------------- embeddings

def write_embeddings():
    rng = random.Random(7)
    rows = []

    def vec(*vals):
        return list(vals)

    # travel cluster: for the query word "traveling" the two nearest
    # neighbors must be travelers then trips, with plain "travel" third.
    rows.append(("travel", vec(0.92, 0.18, 0.06, 0.02, 0.01)))
    rows.append(("traveling", vec(1.00, 0.10, 0.02, 0.00, 0.00)))
    rows.append(("travelers", vec(0.99, 0.11, 0.03, 0.00, 0.00)))
    rows.append(("trips", vec(0.97, 0.12, 0.01, 0.03, 0.00)))
    rows.append(("vacation", vec(0.80, 0.30, 0.20, 0.10, 0.05)))
    rows.append(("holiday", vec(0.80, 0.30, 0.20, 0.10, 0.05)))  # exact tie with vacation
    rows.append(("tour", vec(0.85, 0.25, 0.15, 0.05, 0.02)))
    rows.append(("flight", vec(0.70, 0.40, 0.25, 0.12, 0.03)))

    rows.append(("rome", vec(0.10, 0.95, 0.10, 0.05, 0.02)))
    rows.append(("roman", vec(0.12, 0.93, 0.12, 0.04, 0.03)))
    rows.append(("italy", vec(0.11, 0.90, 0.18, 0.06, 0.01)))

    rows.append(("june", vec(0.05, 0.10, 0.95, 0.08, 0.02)))
    rows.append(("july", vec(0.04, 0.11, 0.94, 0.09, 0.03)))
    rows.append(("summer", vec(0.08, 0.09, 0.90, 0.15, 0.04)))

    rows.append(("group", vec(0.06, 0.05, 0.08, 0.92, 0.10)))
    rows.append(("groups", vec(0.05, 0.06, 0.07, 0.93, 0.11)))
    rows.append(("team", vec(0.08, 0.04, 0.10, 0.88, 0.18)))

    rows.append(("school", vec(0.04, 0.06, 0.05, 0.15, 0.92)))
    rows.append(("schools", vec(0.05, 0.05, 0.06, 0.14, 0.93)))
    rows.append(("students", vec(0.06, 0.04, 0.08, 0.20, 0.88)))
    rows.append(("student", vec(0.06, 0.05, 0.07, 0.21, 0.89)))
    rows.append(("college", vec(0.03, 0.08, 0.04, 0.25, 0.85)))

    # stopwords must never come back as neighbors even though they are close
    # to everything in this tiny space
    rows.append(("the", vec(0.45, 0.45, 0.45, 0.45, 0.45)))
    rows.append(("of", vec(0.44, 0.46, 0.45, 0.45, 0.44)))

    for i in range(18):
        rows.append((f"filler{i:02d}", [round(rng.uniform(-1, 1), 4) for _ in range(5)]))

    lines = [f"{w} " + " ".join(f"{x:.4f}" for x in v) for w, v in rows]
    (HERE / "embeddings_toy.txt").write_text("\n".join(lines) + "\n")


# ------------------------------------------------------------------ hypernyms

def write_hypernyms():
    rows = [
        ("hyponym", "hypernym", "confidence"),
        ("operating expense", "travel", "0.82"),
        ("related expense", "travel", "0.80"),
        ("personal expense", "travel", "0.76"),
        ("business trip", "travel", "0.74"),
        ("operating expense", "traveling", "0.82"),
        ("related expense", "traveling", "0.80"),
        ("personal expense", "traveling", "0.76"),
        ("business trip", "traveling", "0.74"),
        ("summer month", "june", "0.90"),
        ("study group", "group", "0.88"),
        ("boarding school", "school", "0.85"),
        ("exchange student", "students", "0.81"),
        ("pasta dish", "recipe", "0.79"),
        ("league match", "football", "0.83"),
    ]
    text = "\n".join("\t".join(r) for r in rows) + "\n"
    (HERE / "hypernym_toy.tsv").write_text(text)


# ------------------------------------------------------------------- KB cache

def write_kb_cache():
    entries = [
        ("travel", ["Tourism", "Tourist activities", "Transport culture"]),
        ("traveling", ["Tourism", "Tourist activities", "Transport culture"]),
        ("rome", ["Capitals in Europe", "Cities in Italy"]),
        ("june", ["Months of the year"]),
        ("school", ["Educational institutions"]),
        ("students", ["People by occupation"]),
        ("football", ["Ball games", "Team sports"]),
        ("recipe", ["Cooking", "Food preparation"]),
        ("guitar", ["String instruments"]),
        ("rain", ["Precipitation", "Weather phenomena"]),
    ]
    lines = [
        json.dumps(
            {"key": k, "subjects": s, "fetched_at": "2026-08-01T00:00:00Z"}, sort_keys=True
        )
        for k, s in entries
    ]
    (HERE / "kb_cache_toy.jsonl").write_text("\n".join(lines) + "\n")


# ------------------------------------------------------------------- datasets

TOPICS = {
    "travel": ["travel", "trips", "rome", "italy", "june", "summer", "vacation", "flight",
               "hotel", "luggage", "tour", "holiday"],
    "school": ["school", "students", "teacher", "classroom", "exam", "homework", "college",
               "lesson", "grades"],
    "cooking": ["recipe", "pasta", "sauce", "kitchen", "dinner", "chef", "oven", "garlic"],
    "sports": ["football", "match", "team", "stadium", "coach", "goal", "training", "league"],
    "music": ["guitar", "concert", "band", "song", "melody", "piano", "rehearsal"],
    "weather": ["rain", "storm", "forecast", "wind", "temperature", "cloud", "umbrella"],
}
TOPIC_NAMES = list(TOPICS)

MT_SWAPS = {
    "traveling": "touring",
    "students": "pupils",
    "group": "party",
    "find": "locate",
    "good": "fine",
    "best": "finest",
    "cheap": "inexpensive",
    "recommend": "suggest",
    "where": "in which place",
}


def mt_text(text, rng):
    """Simulated machine translation: stilted synonym swaps plus one word-order wobble."""
    words = text.split()
    words = [MT_SWAPS.get(w.lower(), w) for w in words]
    if len(words) > 4:
        i = rng.randrange(1, len(words) - 2)
        words[i], words[i + 1] = words[i + 1], words[i]
    return " ".join(words)


def candidate_text(rng, topic, shared, distinct):
    """A candidate question: `shared` words drawn from the query topic plus fillers."""
    pool = TOPICS[topic]
    words = rng.sample(pool, min(shared, len(pool)))
    other = TOPIC_NAMES[(TOPIC_NAMES.index(topic) + 1) % len(TOPIC_NAMES)]
    words += rng.sample(TOPICS[other], min(distinct, len(TOPICS[other])))
    rng.shuffle(words)
    return "Does anyone know about {}?".format(" ".join(words))


def build_query(rng, qid, topic, text, n_relevant, all_relevant=False):
    labels = []
    if all_relevant:
        labels = ["PerfectMatch"] + ["Relevant"] * 9
    else:
        labels = ["Relevant"] * n_relevant + ["Irrelevant"] * (10 - n_relevant)
        if n_relevant > 0:
            labels[0] = "PerfectMatch"
        rng.shuffle(labels)
    candidates = []
    for i, label in enumerate(labels, start=1):
        relevant = label != "Irrelevant"
        shared = rng.randint(3, 5) if relevant else rng.randint(0, 1)
        distinct = rng.randint(0, 2) if relevant else rng.randint(3, 5)
        candidates.append({
            "doc_id": f"{qid}_R{i}",
            "text": candidate_text(rng, topic, shared, distinct),
            "relevance": label,
        })
    return {"query_id": qid, "text": text, "candidates": candidates}


def write_datasets():
    rng = random.Random(20160613)

    test_queries = []
    # the travel question, with candidates about trips to keep it realistic
    travel = build_query(
        rng, "q01", "travel",
        "I will be traveling to Rome in June with a group of high school students .",
        3)
    test_queries.append(travel)

    patterns = {5: 0, 8: 10, 13: 0}  # two zero-relevant queries, one all-relevant
    for n in range(2, 21):
        qid = f"q{n:02d}"
        topic = TOPIC_NAMES[n % len(TOPIC_NAMES)]
        words = rng.sample(TOPICS[topic], 4)
        text = "Where can I find good {} and {} or {} near the {} ?".format(*words)
        n_rel = patterns.get(n, rng.randint(1, 4))
        test_queries.append(build_query(rng, qid, topic, text, n_rel, all_relevant=(n == 8)))

    dev_queries = []
    for n in range(1, 6):
        qid = f"d{n:02d}"
        topic = TOPIC_NAMES[(n + 2) % len(TOPIC_NAMES)]
        words = rng.sample(TOPICS[topic], 4)
        text = "Can anyone recommend the best {} with {} and {} for {} ?".format(*words)
        n_rel = 0 if n == 4 else rng.randint(1, 4)
        dev_queries.append(build_query(rng, qid, topic, text, n_rel))

    def dump(queries, scenario, path):
        mt_rng = random.Random(99)
        lines = []
        for q in queries:
            rec = {
                "query_id": q["query_id"],
                "scenario": scenario,
                "text": q["text"] if scenario == "en" else mt_text(q["text"], mt_rng),
                "candidates": q["candidates"],
            }
            lines.append(json.dumps(rec, sort_keys=True))
        (HERE / path).write_text("\n".join(lines) + "\n")

    dump(test_queries, "en", "dataset_en_test.jsonl")
    dump(test_queries, "mt", "dataset_mt_test.jsonl")
    dump(dev_queries, "en", "dataset_en_dev.jsonl")
    dump(dev_queries, "mt", "dataset_mt_dev.jsonl")


# ---------------------------------------------------------------- XML sample

XML_SAMPLE = """<?xml version="1.0" encoding="UTF-8"?>
<root>
<OrgQuestion ORGQ_ID="X1">
  <OrgQSubject>Travel &amp; visas</OrgQSubject>
  <OrgQBody>Do I need a visa to visit Rome in June?</OrgQBody>
  <Thread THREAD_SEQUENCE="X1_R1">
    <RelQuestion RELQ_ID="X1_R1" RELQ_CATEGORY="Visas" RELQ_RELEVANCE2ORGQ="PerfectMatch">
      <RelQSubject>Visa for Italy</RelQSubject>
      <RelQBody>How do I get a tourist visa for Italy &#233;asily?</RelQBody>
    </RelQuestion>
    <RelComment RELC_ID="X1_R1_C1"><RelCText>Just apply online.</RelCText></RelComment>
  </Thread>
</OrgQuestion>
<OrgQuestion ORGQ_ID="X1">
  <OrgQSubject>Travel &amp; visas</OrgQSubject>
  <OrgQBody>Do I need a visa to visit Rome in June?</OrgQBody>
  <Thread THREAD_SEQUENCE="X1_R2">
    <RelQuestion RELQ_ID="X1_R2" RELQ_RELEVANCE2ORGQ="Irrelevant">
      <RelQSubject>Best pasta</RelQSubject>
      <RelQBody>Looking for a &quot;good&quot; pasta recipe</RelQBody>
    </RelQuestion>
  </Thread>
</OrgQuestion>
<OrgQuestion ORGQ_ID="X2">
  <OrgQSubject>School trips</OrgQSubject>
  <OrgQBody></OrgQBody>
  <Thread THREAD_SEQUENCE="X2_R5">
    <RelQuestion RELQ_ID="X2_R5" RELQ_RELEVANCE2ORGQ="Relevant">
      <RelQSubject>Organizing a school trip</RelQSubject>
      <RelQBody>Tips for organizing trips with students?</RelQBody>
    </RelQuestion>
  </Thread>
</OrgQuestion>
</root>
"""


def write_xml_sample():
    (HERE / "semeval_sample.xml").write_text(XML_SAMPLE)
    expected = [
        {
            "query_id": "X1",
            "scenario": "en",
            "text": "Travel & visas Do I need a visa to visit Rome in June?",
            "candidates": [
                {"doc_id": "X1_R1",
                 "text": "Visa for Italy How do I get a tourist visa for Italy éasily?",
                 "relevance": "PerfectMatch"},
                {"doc_id": "X1_R2",
                 "text": "Best pasta Looking for a \"good\" pasta recipe",
                 "relevance": "Irrelevant"},
            ],
        },
        {
            "query_id": "X2",
            "scenario": "en",
            "text": "School trips",
            "candidates": [
                {"doc_id": "X2_R5",
                 "text": "Organizing a school trip Tips for organizing trips with students?",
                 "relevance": "Relevant"},
            ],
        },
    ]
    # field order matches the converter's output (nlohmann sorts keys)
    lines = [json.dumps(rec, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
             for rec in expected]
    (HERE / "semeval_sample_expected.jsonl").write_text("\n".join(lines) + "\n")


if __name__ == "__main__":
    write_embeddings()
    write_hypernyms()
    write_kb_cache()
    write_datasets()
    write_xml_sample()
    print("fixtures written to", HERE)
