import json
from dataclasses import dataclass
from pathlib import Path

# Must match the questions the C++ extractor asks.
QUESTIONS = {
    "broad": "Which cancer is mentioned?",
    "subtype": "What is the specific cancer type?",
}


class MissingSpan(ValueError):
    code = "MISSING_SPAN"


@dataclass(frozen=True)
class TrainingExample:
    record_id: str
    question_kind: str
    question: str
    context: str
    # Character (not byte) offset into `context`.
    answer_start: int
    answer_text: str


def read_jsonl(path):
    rows = []
    with open(path, encoding="utf-8") as f:
        for n, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                rows.append(json.loads(line))
            except json.JSONDecodeError as e:
                raise ValueError(f"{path}:{n}: {e}") from e
    return rows


def read_corpus(path):
    return read_jsonl(path)


def read_splits(path):
    out = {}
    for row in read_jsonl(path):
        if row["split"] not in ("train", "validation", "test"):
            raise ValueError(f"{path}: unknown split {row['split']!r}")
        out[row["record_id"]] = row["split"]
    return out


def byte_to_char(text, offset):
    """Converts a UTF-8 byte offset into a character offset."""
    return len(text.encode("utf-8")[:offset].decode("utf-8"))


def examples_for_record(record):
    out = []
    for kind in ("broad", "subtype"):
        span = record.get(f"{kind}_span")
        if span is None:
            raise MissingSpan(f"record {record['id']!r} has no {kind} span")
        ctx = record["context"]
        start, end = byte_to_char(ctx, span[0]), byte_to_char(ctx, span[1])
        out.append(TrainingExample(record["id"], kind, QUESTIONS[kind], ctx, start, ctx[start:end]))
    return out


def prepare_training_examples(corpus_file, split_file, split="train"):
    """Two examples (broad, subtype) per record of `split`, in record id order."""
    splits = read_splits(split_file)
    records = sorted((r for r in read_corpus(corpus_file) if splits.get(r["id"]) == split), key=lambda r: r["id"])
    examples = []
    for r in records:
        examples.extend(examples_for_record(r))
    return examples


def write_examples(path, examples):
    with open(path, "w", encoding="utf-8") as f:
        for e in examples:
            f.write(json.dumps(e.__dict__, ensure_ascii=False) + "\n")


def load_examples(path):
    return [TrainingExample(**row) for row in read_jsonl(Path(path))]
