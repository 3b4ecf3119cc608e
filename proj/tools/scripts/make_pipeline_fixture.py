#!/usr/bin/env python3
"""Writes the synthetic pipeline fixture under data/synthetic and the
three-page layout fixture under tests/data/layout.

Synthetic documents are word-box files laid out like scanned reports: a
recurring header and footer on every page and a few diagnosis paragraphs in
the body. Gold labels are keyed by the chunk ids the ingest stage assigns
(<doc>#<n>, body blocks in reading order). A few words carry OCR-style
typos that the lexicon corrects, and two paragraphs paraphrase their
diagnosis so their subtype spans come from the annotation sidecar.

Usage: python3 tools/scripts/make_pipeline_fixture.py
"""

import json
import random
from pathlib import Path

ROOT = Path(__file__).resolve().parents[2]
OUT = ROOT / "data" / "synthetic"
LAYOUT = ROOT / "tests" / "data" / "layout"

ONTOLOGY = [
    ("prostate cancer", ["prostate adenocarcinoma", "prostatic ductal adenocarcinoma"]),
    ("breast cancer", ["invasive ductal carcinoma", "invasive lobular carcinoma"]),
    ("colorectal cancer", ["colon adenocarcinoma", "rectal adenocarcinoma"]),
    ("lung cancer", ["lung adenocarcinoma", "squamous cell carcinoma of the lung"]),
    ("kidney cancer", ["clear cell renal cell carcinoma", "papillary renal cell carcinoma"]),
    ("bladder cancer", ["urothelial carcinoma"]),
    ("thyroid cancer", ["papillary thyroid carcinoma", "follicular thyroid carcinoma"]),
    ("ovarian cancer", ["high grade serous carcinoma"]),
    ("pancreatic cancer", ["pancreatic ductal adenocarcinoma"]),
    ("soft tissue sarcoma", ["leiomyosarcoma", "liposarcoma"]),
]

OPENERS = ["Sections reveal", "Microscopic examination shows", "The specimen demonstrates",
           "Histologic sections show", "Findings include"]
TAILS = ["Margins are negative.", "Lymphovascular invasion is not identified.",
         "Tumor size is 2.3 cm.", "Lymph nodes 0/12 are negative.", "Grade 2 of 3.",
         "Ki-67 index is 15%.", "Immunohistochemistry supports the diagnosis."]
LINKS = ["consistent with", "in keeping with", "diagnostic of"]

HEADER = "CITY HOSPITAL PATHOLOGY REPORT"
FOOTER = "Confidential patient record page {page} of {pages}"

# OCR-style misspellings the lexicon fixes (distance <= 2, unique nearest word).
TYPOS = {"Sections": "Sectlons", "specimen": "specirnen", "negative.": "negatlve.",
         "Margins": "Marglns"}

LINE_H = 0.018
LINE_GAP = 0.006
PARA_GAP = 0.05
WORDS_PER_LINE = 9


def words_to_lines(text):
    words = text.split()
    return [words[i:i + WORDS_PER_LINE] for i in range(0, len(words), WORDS_PER_LINE)]


def place_line(words, page, y0, x_start=0.08, x_limit=0.92):
    out = []
    x = x_start
    char_w = (x_limit - x_start) / 80.0
    for w in words:
        width = max(1, len(w)) * char_w
        out.append({"text": w, "page": page, "x0": round(x, 5), "y0": round(y0, 5),
                    "x1": round(x + width, 5), "y1": round(y0 + LINE_H, 5), "confidence": 0.97})
        x += width + char_w
    return out


def place_paragraph(text, page, y0, **kw):
    boxes = []
    y = y0
    for line in words_to_lines(text):
        boxes += place_line(line, page, y, **kw)
        y += LINE_H + LINE_GAP
    return boxes, y


def paragraph(rng, broad, subtype, paraphrase):
    opener = rng.choice(OPENERS)
    tail = " ".join(rng.sample(TAILS, 2))
    if paraphrase:
        # Broad label verbatim, subtype only as a paraphrase.
        body = f"{opener} a malignant neoplasm, best classified as {broad} of the {subtype.split()[-1]} type."
        return f"{body} {tail}", None
    body = f"{opener} {subtype} {rng.choice(LINKS)} {broad}."
    return f"{body} {tail}", subtype


def with_typos(text, rng):
    words = text.split()
    for i, w in enumerate(words):
        if w in TYPOS and rng.random() < 0.5:
            words[i] = TYPOS[w]
    return " ".join(words)


def write_jsonl(path, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        for r in rows:
            f.write(json.dumps(r, ensure_ascii=False) + "\n")


def synthetic():
    rng = random.Random(20241015)
    onto = []
    for bi, (broad, subs) in enumerate(ONTOLOGY, 1):
        bid = f"B{bi:02d}"
        onto.append({"id": bid, "name": broad, "level": "broad"})
        for si, sub in enumerate(subs, 1):
            onto.append({"id": f"{bid}S{si}", "name": sub, "level": "subtype", "parent_id": bid})
    write_jsonl(OUT / "ontology.jsonl", onto)

    pairs = [(b, s) for b, subs in ONTOLOGY for s in subs]
    gold, annotations, vocab = [], [], set()
    docs = OUT / "docs"
    docs.mkdir(parents=True, exist_ok=True)
    for old in docs.glob("*.jsonl"):
        old.unlink()
    paraphrased = {("report03", 1), ("report05", 4)}
    for d in range(1, 7):
        doc_id = f"report{d:02d}"
        n_pages = 3 if d % 2 else 2
        boxes, chunk = [], 0
        for page in range(1, n_pages + 1):
            boxes += place_line(HEADER.split(), page, 0.03)[:]
            y = 0.12
            for _ in range(3 if n_pages == 3 else 4):
                broad, sub = rng.choice(pairs)
                para = (doc_id, chunk) in paraphrased
                clean, sub_text = paragraph(rng, broad, sub, para)
                vocab.update(w.strip(".,;:%").lower() for w in clean.split())
                noisy = with_typos(clean, rng)
                b, y = place_paragraph(noisy, page, y)
                boxes += b
                y += PARA_GAP
                entry = {"chunk_id": f"{doc_id}#{chunk}", "broad_label": broad, "subtype_label": sub}
                gold.append(entry)
                if para:
                    # The paraphrase ends with "<broad> of the <head noun> type."
                    head = sub.split()[-1]
                    start = clean.index(f"{broad} of the {head} type")
                    end = start + len(f"{broad} of the {head} type")
                    annotations.append({"record_id": entry["chunk_id"], "question_kind": "subtype",
                                        "char_start": start, "char_end": end})
                chunk += 1
            boxes += place_line(FOOTER.format(page=page, pages=n_pages).split(), page, 0.95)
        # Shuffled file order: ingestion must not depend on it.
        rng.shuffle(boxes)
        write_jsonl(docs / f"{doc_id}.jsonl", boxes)
    write_jsonl(OUT / "gold.jsonl", gold)
    write_jsonl(OUT / "annotations.jsonl", annotations)
    words = sorted(w for w in vocab if w.isalpha())
    (OUT / "lexicon.txt").write_text("# English words used by the synthetic reports\n" + "\n".join(words) + "\n")
    print(f"{len(gold)} chunks, {len(annotations)} annotations")


def layout_fixture():
    """Three pages with a recurring header and footer. The expected chunk
    order is listed by hand in the layout test. Word order in the file is
    shuffled."""
    boxes = []
    header = "ACME LABS SURGICAL PATHOLOGY"
    for page in (1, 2, 3):
        boxes += place_line(header.split(), page, 0.02)
        boxes += place_line(f"Page {page} of 3 printed 2024-06-07".split(), page, 0.955)
    boxes += place_paragraph("Clinical history: elevated PSA and an abnormal digital rectal exam.", 1, 0.15)[0]
    boxes += place_paragraph("Final diagnosis: prostate adenocarcinoma, Gleason score 4+3=7.", 1, 0.40)[0]
    # The lower block sits further left; order is still top to bottom.
    boxes += place_paragraph("Core 1 shows tumor in 40% of the tissue sampled from the left apex.", 2, 0.20,
                             x_start=0.45, x_limit=0.95)[0]
    boxes += place_paragraph("Core 2 is benign prostatic tissue.", 2, 0.50,
                             x_start=0.05, x_limit=0.45)[0]
    boxes += place_paragraph("Comment: perineural invasion is present.", 3, 0.30)[0]
    random.Random(3).shuffle(boxes)
    write_jsonl(LAYOUT / "three_pages.jsonl", boxes)


if __name__ == "__main__":
    synthetic()
    layout_fixture()
