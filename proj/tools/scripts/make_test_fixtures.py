#!/usr/bin/env python3
"""Regenerates tests/data: a small byte-level BPE tokenizer, reference
tokenizations from the `tokenizers` library, and tiny randomly initialised
RoBERTa graphs with reference outputs computed by torch.

Needs: tokenizers, torch, transformers, onnx, onnxscript.
Usage: python3 tools/scripts/make_test_fixtures.py [out_dir]
"""

import json
import random
import sys
from pathlib import Path

import torch
from tokenizers import ByteLevelBPETokenizer
from tokenizers.processors import RobertaProcessing
from transformers import RobertaConfig, RobertaForQuestionAnswering, RobertaModel

OUT = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parents[2] / "tests" / "data"
SPECIALS = ["<s>", "<pad>", "</s>", "<unk>", "<mask>"]
MAX_SEQ = 64

SITES = ["prostate", "breast", "lung", "colon", "kidney", "bladder", "thyroid", "ovary", "pancreas", "liver"]
KINDS = ["adenocarcinoma", "carcinoma", "squamous cell carcinoma", "ductal carcinoma", "sarcoma",
         "papillary carcinoma", "clear cell carcinoma", "melanoma", "lymphoma"]
FILLER = ["The specimen shows", "Sections reveal", "Microscopic examination demonstrates",
          "Findings are consistent with", "There is evidence of", "No residual", "Margins are free of",
          "Gleason score 4+3=7", "tumor size 2.3 cm", "lymph nodes 0/12", "grade 2 of 3",
          "immunohistochemistry: CK7 positive, CK20 negative", "pT2N0M0", "Ki-67 index 15%"]


def corpus(rng, n=3000):
    lines = []
    for _ in range(n):
        parts = [rng.choice(FILLER), rng.choice(SITES), rng.choice(KINDS) + ".", rng.choice(FILLER) + ","]
        rng.shuffle(parts)
        lines.append(" ".join(parts))
    return lines


PROBES = [
    "prostate adenocarcinoma",
    "Invasive ductal carcinoma of the left breast, grade 2.",
    "  leading and trailing spaces  ",
    "multiple   spaces\tand\ttabs\nand\n\nnewlines",
    "Gleason 4+3=7 (score 7/10); margins: negative!!",
    "café résumé naïve Ångström",
    "Größe 3 cm, Lymphknoten 0/12",
    "μ-opioid β-catenin α1",
    "腺癌 前列腺 癌症",
    "emoji 🙂 test 🧬🔬",
    "don't can't it's we'll they've I'm",
    "HER2+ ER+ PR- Ki-67 15%",
    "pT2N0M0 pT3aN1 ypT0",
    "x" * 40,
    "1234567890 3.14159 1,000,000",
    "",
    " ",
    "a",
    "__init__ snake_case CamelCase",
    "email@example.com http://example.org/path?q=1",
    " non breaking spaces",
    "mixed ١٢٣ digits ٤٥",
    "tab\tat\tend\t",
    "end with newline\n",
    "questionable?! punctuation... ---",
]


def byte_offsets(text, offsets):
    return [[len(text[:s].encode("utf-8")), len(text[:e].encode("utf-8"))] for s, e in offsets]


def build_tokenizer(rng):
    tok = ByteLevelBPETokenizer(add_prefix_space=False, trim_offsets=True)
    tok.train_from_iterator(corpus(rng), vocab_size=700, min_frequency=2, special_tokens=SPECIALS)
    tok.post_processor = RobertaProcessing(("</s>", 2), ("<s>", 0), trim_offsets=True, add_prefix_space=False)
    path = OUT / "tokenizer.json"
    tok.save(str(path))
    return tok


def tokenizer_parity(tok):
    cases = []
    for text in PROBES:
        enc = tok.encode(text, add_special_tokens=False)
        cases.append({"text": text, "ids": enc.ids, "tokens": enc.tokens,
                      "offsets": byte_offsets(text, enc.offsets)})
    pairs = []
    for q, c in [("Which cancer is mentioned?", "Sections reveal prostate adenocarcinoma, Gleason 4+3=7."),
                 ("What is the specific cancer type?", "café tumor  of the ovary; clear cell carcinoma")]:
        enc = tok.encode(q, c)
        pairs.append({"question": q, "context": c, "ids": enc.ids, "type_ids": enc.type_ids})
    (OUT / "tokenizer_parity.json").write_text(json.dumps({"single": cases, "pair": pairs}, ensure_ascii=False, indent=1))


def config(vocab):
    return RobertaConfig(vocab_size=vocab, hidden_size=32, num_hidden_layers=2, num_attention_heads=4,
                         intermediate_size=64, max_position_embeddings=MAX_SEQ + 2, type_vocab_size=1,
                         pad_token_id=1, bos_token_id=0, eos_token_id=2)


class QaWrapper(torch.nn.Module):
    def __init__(self, model):
        super().__init__()
        self.model = model

    def forward(self, input_ids, attention_mask):
        out = self.model(input_ids=input_ids, attention_mask=attention_mask)
        return out.start_logits, out.end_logits


class EmbedWrapper(torch.nn.Module):
    def __init__(self, model):
        super().__init__()
        self.model = model

    def forward(self, input_ids, attention_mask):
        return self.model(input_ids=input_ids, attention_mask=attention_mask).last_hidden_state


def export(module, example, path, outputs, dynamo):
    dyn = {"input_ids": {1: "seq"}, "attention_mask": {1: "seq"}}
    for name in outputs:
        dyn[name] = {1: "seq"}
    torch.onnx.export(module, example, str(path), input_names=["input_ids", "attention_mask"],
                      output_names=outputs, dynamic_axes=dyn, opset_version=18 if dynamo else 17,
                      dynamo=dynamo, external_data=dynamo)
    # The TorchScript exporter leaves the module in training mode.
    module.eval()


def probe_ids(tok, rng):
    seqs = []
    texts = ["Which cancer is mentioned?", "What is the specific cancer type?"]
    for k in range(10):
        q = texts[k % 2]
        c = " ".join(rng.choice(corpus(rng, 1)) for _ in range(1 + k % 3))
        ids = tok.encode(q, c).ids[:MAX_SEQ]
        seqs.append(ids)
    return seqs


def graphs(tok, rng):
    gdir = OUT / "graphs"
    gdir.mkdir(parents=True, exist_ok=True)
    vocab = tok.get_vocab_size()
    torch.manual_seed(7)
    qa = RobertaForQuestionAnswering(config(vocab)).eval()
    wrapper = QaWrapper(qa)
    example = (torch.tensor([[0, 5, 6, 2, 2, 7, 8, 2]]), torch.ones(1, 8, dtype=torch.long))
    probes = []
    with torch.no_grad():
        for ids in probe_ids(tok, rng):
            t = torch.tensor([ids])
            s, e = wrapper(t, torch.ones_like(t))
            probes.append({"ids": ids, "start": s[0].tolist(), "end": e[0].tolist()})
    (gdir / "qa_probes.json").write_text(json.dumps(probes))
    export(wrapper, example, gdir / "qa.onnx", ["start_logits", "end_logits"], dynamo=False)
    export(wrapper, example, gdir / "qa_dynamo.onnx", ["start_logits", "end_logits"], dynamo=True)

    torch.manual_seed(11)
    enc = RobertaModel(config(vocab), add_pooling_layer=False).eval()
    ew = EmbedWrapper(enc)
    texts = ["prostate adenocarcinoma", "metastatic prostate cancer", "clear cell carcinoma of the kidney",
             "café lymphoma", "grade 2"]
    probes = []
    with torch.no_grad():
        for text in texts:
            ids = tok.encode(text).ids
            t = torch.tensor([ids])
            h = ew(t, torch.ones_like(t))[0]
            probes.append({"text": text, "ids": ids, "hidden": h[1:-1].tolist()})
    (gdir / "embedder_probes.json").write_text(json.dumps(probes))
    export(ew, example, gdir / "embedder.onnx", ["last_hidden_state"], dynamo=False)


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    rng = random.Random(20240607)
    tok = build_tokenizer(rng)
    tokenizer_parity(tok)
    graphs(tok, rng)


if __name__ == "__main__":
    main()
