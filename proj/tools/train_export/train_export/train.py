import hashlib
import json
import math
import random
import string
from dataclasses import asdict, dataclass, field
from pathlib import Path

import torch
from tokenizers import Tokenizer


@dataclass
class TrainingConfig:
    # A local directory or hub name, or "tiny-random" for a small randomly
    # initialised encoder (tests, smoke runs).
    base_model_name: str = "roberta-base"
    learning_rate: float = 3e-5
    epochs: int = 3
    batch_size: int = 16
    max_seq_len: int = 384
    # Advance between consecutive context windows, in tokens.
    stride: int = 128
    seed: int = 42
    max_answer_tokens: int = 30


class TrainingDiverged(RuntimeError):
    pass


@dataclass
class Checkpoint:
    model: torch.nn.Module
    tokenizer_file: Path
    config: TrainingConfig
    epoch_losses: list = field(default_factory=list)
    run_id: str = ""

    def save(self, out_dir):
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        self.model.save_pretrained(out / "model")
        (out / "tokenizer.json").write_bytes(Path(self.tokenizer_file).read_bytes())
        meta = {"config": asdict(self.config), "epoch_losses": self.epoch_losses, "run_id": self.run_id}
        (out / "training.json").write_text(json.dumps(meta, indent=2))

    @staticmethod
    def load(ckpt_dir):
        from transformers import RobertaForQuestionAnswering

        d = Path(ckpt_dir)
        meta = json.loads((d / "training.json").read_text())
        model = RobertaForQuestionAnswering.from_pretrained(d / "model").eval()
        return Checkpoint(model, d / "tokenizer.json", TrainingConfig(**meta["config"]), meta["epoch_losses"],
                          meta["run_id"])


class Windows:
    """Question/context windows laid out like the C++ encoder:
    <s> question </s></s> context-slice </s>, slices advancing by `stride`."""

    def __init__(self, tokenizer, max_seq_len, stride):
        self.tok = tokenizer
        self.max_seq_len = max_seq_len
        self.stride = stride
        self.cls = tokenizer.token_to_id("<s>")
        self.sep = tokenizer.token_to_id("</s>")
        self.pad = tokenizer.token_to_id("<pad>")

    def __call__(self, question, context):
        q = self.tok.encode(question, add_special_tokens=False).ids
        c = self.tok.encode(context, add_special_tokens=False)
        cap = self.max_seq_len - len(q) - 4
        if cap <= 0:
            raise ValueError("question too long for max_seq_len")
        if not 1 <= self.stride < cap:
            raise ValueError(f"stride {self.stride} must be in [1, {cap})")
        out = []
        start = 0
        while True:
            ids = c.ids[start:start + cap]
            offs = c.offsets[start:start + cap]
            head = [self.cls] + q + [self.sep, self.sep]
            out.append({"ids": head + ids + [self.sep], "first": len(head), "offsets": offs})
            if start + cap >= len(c.ids):
                break
            start += self.stride
        return out


def label_window(window, answer_start, answer_end):
    """Token positions of the answer inside the window, or (0, 0) when the
    answer is not fully contained."""
    offs = window["offsets"]
    s = next((k for k, (a, b) in enumerate(offs) if b > answer_start), None)
    e = next((k for k in range(len(offs) - 1, -1, -1) if offs[k][0] < answer_end), None)
    if s is None or e is None or offs[s][0] > answer_start or offs[e][1] < answer_end or e < s:
        return 0, 0
    return window["first"] + s, window["first"] + e


def tiny_config(vocab_size, max_seq_len):
    from transformers import RobertaConfig

    return RobertaConfig(vocab_size=vocab_size, hidden_size=64, num_hidden_layers=2, num_attention_heads=4,
                         intermediate_size=128, max_position_embeddings=max_seq_len + 2, type_vocab_size=1,
                         pad_token_id=1, bos_token_id=0, eos_token_id=2)


def base_model(config, tokenizer):
    from transformers import RobertaForQuestionAnswering

    if config.base_model_name == "tiny-random":
        return RobertaForQuestionAnswering(tiny_config(tokenizer.get_vocab_size(), config.max_seq_len))
    return RobertaForQuestionAnswering.from_pretrained(config.base_model_name)


def run_id(config, examples):
    h = hashlib.sha256(json.dumps(asdict(config), sort_keys=True).encode())
    for e in examples:
        h.update(f"{e.record_id}/{e.question_kind}".encode())
    return h.hexdigest()[:16]


def _batches(features, batch_size, generator, pad):
    order = torch.randperm(len(features), generator=generator).tolist()
    for k in range(0, len(order), batch_size):
        chunk = [features[i] for i in order[k:k + batch_size]]
        width = max(len(f["ids"]) for f in chunk)
        ids = torch.full((len(chunk), width), pad, dtype=torch.long)
        mask = torch.zeros((len(chunk), width), dtype=torch.long)
        for r, f in enumerate(chunk):
            ids[r, :len(f["ids"])] = torch.tensor(f["ids"])
            mask[r, :len(f["ids"])] = 1
        starts = torch.tensor([f["start"] for f in chunk])
        ends = torch.tensor([f["end"] for f in chunk])
        yield ids, mask, starts, ends


def fine_tune(examples, config, tokenizer_file, validation=None, log=print):
    """Trains start/end heads (and the encoder) on the examples. Fixed seeds
    and deterministic kernels make reruns reproduce the loss curve."""
    if not examples:
        raise ValueError("no training examples")
    random.seed(config.seed)
    torch.manual_seed(config.seed)
    torch.use_deterministic_algorithms(True)
    tokenizer = Tokenizer.from_file(str(tokenizer_file))
    windows = Windows(tokenizer, config.max_seq_len, config.stride)

    features = []
    for e in examples:
        for w in windows(e.question, e.context):
            s, t = label_window(w, e.answer_start, e.answer_start + len(e.answer_text))
            features.append({"ids": w["ids"], "start": s, "end": t})

    model = base_model(config, tokenizer)
    model.train()
    optim = torch.optim.AdamW(model.parameters(), lr=config.learning_rate)
    gen = torch.Generator().manual_seed(config.seed)
    losses = []
    for epoch in range(config.epochs):
        total, batches = 0.0, 0
        model.train()
        for ids, mask, starts, ends in _batches(features, config.batch_size, gen, windows.pad):
            out = model(input_ids=ids, attention_mask=mask, start_positions=starts, end_positions=ends)
            if not torch.isfinite(out.loss):
                raise TrainingDiverged(f"loss became {out.loss.item()} at epoch {epoch + 1}, batch {batches + 1}; "
                                       f"learning_rate {config.learning_rate}")
            optim.zero_grad()
            out.loss.backward()
            optim.step()
            total += out.loss.item()
            batches += 1
        losses.append(total / batches)
        msg = {"event": "train.epoch", "epoch": epoch + 1, "loss": losses[-1]}
        if validation:
            msg["validation_em"] = exact_match_pct(model, tokenizer_file, validation, config)
        log(json.dumps(msg))
    model.eval()
    return Checkpoint(model, Path(tokenizer_file), config, losses, run_id(config, examples))


def _normalize(text):
    text = "".join(ch for ch in text.lower() if ch not in string.punctuation)
    return [t for t in text.split() if t not in ("a", "an", "the")]


def predict_answers(model, tokenizer_file, examples, config):
    """Best span per example over all windows (start + end logit)."""
    tokenizer = Tokenizer.from_file(str(tokenizer_file))
    windows = Windows(tokenizer, config.max_seq_len, config.stride)
    model.eval()
    out = []
    with torch.no_grad():
        for e in examples:
            best = (-math.inf, "")
            for w in windows(e.question, e.context):
                ids = torch.tensor([w["ids"]])
                r = model(input_ids=ids, attention_mask=torch.ones_like(ids))
                s, t = r.start_logits[0], r.end_logits[0]
                n = len(w["offsets"])
                for i in range(n):
                    for j in range(i, min(n, i + config.max_answer_tokens)):
                        score = (s[w["first"] + i] + t[w["first"] + j]).item()
                        if score > best[0]:
                            best = (score, e.context[w["offsets"][i][0]:w["offsets"][j][1]])
            out.append(best[1])
    return out


def exact_match_pct(model, tokenizer_file, examples, config):
    preds = predict_answers(model, tokenizer_file, examples, config)
    hits = sum(_normalize(p) == _normalize(e.answer_text) for p, e in zip(preds, examples))
    return 100.0 * hits / len(examples)
