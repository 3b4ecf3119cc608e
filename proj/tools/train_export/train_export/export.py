import datetime
import shutil
from pathlib import Path

import numpy as np
import torch
from tokenizers import Tokenizer

from .manifest import write_manifest
from .schemas import QUESTIONS

PARITY_TOLERANCE = 1e-3

PROBE_TEXTS = [
    "Sections reveal prostate adenocarcinoma, Gleason score 4+3=7.",
    "Invasive ductal carcinoma of the left breast, grade 2.",
    "Findings are consistent with metastatic colon adenocarcinoma.",
    "Small cell carcinoma of the lung; margins are negative.",
    "café tumor of the ovary; clear cell carcinoma.",
    "No residual tumor. Lymph nodes 0/12.",
    "Diffuse large B-cell lymphoma, Ki-67 index 80%.",
    "Urothelial carcinoma of the bladder, high grade.",
    "Melanoma, Breslow thickness 1.2 mm.",
    "Clear cell renal cell carcinoma, ISUP grade 2.",
]


class ExportVerificationError(RuntimeError):
    pass


class _Qa(torch.nn.Module):
    def __init__(self, model):
        super().__init__()
        self.model = model

    def forward(self, input_ids, attention_mask):
        out = self.model(input_ids=input_ids, attention_mask=attention_mask)
        return out.start_logits, out.end_logits


class _Embed(torch.nn.Module):
    def __init__(self, encoder):
        super().__init__()
        self.encoder = encoder

    def forward(self, input_ids, attention_mask):
        return self.encoder(input_ids=input_ids, attention_mask=attention_mask).last_hidden_state


def probe_inputs(tokenizer_file, max_seq_len):
    """Ten fixed id sequences: question/context pairs for QA graphs."""
    tok = Tokenizer.from_file(str(tokenizer_file))
    qs = list(QUESTIONS.values())
    return [tok.encode(qs[k % 2], text).ids[:max_seq_len] for k, text in enumerate(PROBE_TEXTS)]


def export_bundle(checkpoint, out_dir, kind="qa", model_name=None):
    """Writes model.onnx, tokenizer.json and manifest.txt, then checks the
    exported graph against the framework on ten probes. Returns the largest
    absolute difference seen."""
    if kind not in ("qa", "embedder"):
        raise ValueError(f"unknown bundle kind {kind!r}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg = checkpoint.config
    model = checkpoint.model.eval()
    if kind == "qa":
        module, outputs = _Qa(model), ["start_logits", "end_logits"]
    else:
        module, outputs = _Embed(model.roberta), ["last_hidden_state"]
    module.eval()

    dyn = {"input_ids": {1: "seq"}, "attention_mask": {1: "seq"}}
    for name in outputs:
        dyn[name] = {1: "seq"}
    example = (torch.tensor([[0, 5, 6, 2, 2, 7, 8, 2]]), torch.ones(1, 8, dtype=torch.long))
    torch.onnx.export(module, example, str(out / "model.onnx"), input_names=["input_ids", "attention_mask"],
                      output_names=outputs, dynamic_axes=dyn, opset_version=17, dynamo=False)
    module.eval()
    shutil.copyfile(checkpoint.tokenizer_file, out / "tokenizer.json")

    worst = parity(module, out / "model.onnx", probe_inputs(out / "tokenizer.json", cfg.max_seq_len))
    if worst > PARITY_TOLERANCE:
        raise ExportVerificationError(f"exported graph differs from the framework by {worst:.3g}")
    write_manifest(out, kind=kind, graph_file="model.onnx", tokenizer_file="tokenizer.json",
                   max_seq_len=cfg.max_seq_len, stride=cfg.stride if kind == "qa" else None,
                   model_name=model_name or f"{cfg.base_model_name} fine-tuned",
                   training_run_id=checkpoint.run_id,
                   exported_at=datetime.datetime.now(datetime.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"))
    return worst


def parity(module, graph_path, probes):
    import onnxruntime as ort

    sess = ort.InferenceSession(str(graph_path), providers=["CPUExecutionProvider"])
    worst = 0.0
    with torch.no_grad():
        for ids in probes:
            t = torch.tensor([ids])
            m = torch.ones_like(t)
            ref = module(t, m)
            ref = ref if isinstance(ref, tuple) else (ref,)
            got = sess.run(None, {"input_ids": t.numpy(), "attention_mask": m.numpy()})
            for a, b in zip(ref, got):
                worst = max(worst, float(np.max(np.abs(a.numpy() - b))))
    return worst
