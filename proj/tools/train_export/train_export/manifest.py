import hashlib
from pathlib import Path

MANIFEST = "manifest.txt"
KEY_ORDER = ["backend", "kind", "graph_file", "graph_sha256", "graph_data_file", "graph_data_sha256",
             "tokenizer_file", "tokenizer_sha256", "max_seq_len", "stride", "model_name", "training_run_id",
             "exported_at"]


class BundleInvalid(ValueError):
    code = "BUNDLE_INVALID"


def sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def write_manifest(bundle_dir, *, kind, graph_file, tokenizer_file, max_seq_len, stride=None, model_name="",
                   training_run_id="", exported_at="", graph_data_file=None, backend="onnx"):
    """Writes manifest.txt for files already inside `bundle_dir`."""
    d = Path(bundle_dir)
    values = {
        "backend": backend,
        "kind": kind,
        "graph_file": graph_file,
        "graph_sha256": sha256_file(d / graph_file),
        "tokenizer_file": tokenizer_file,
        "tokenizer_sha256": sha256_file(d / tokenizer_file),
        "max_seq_len": str(max_seq_len),
        "model_name": model_name,
        "training_run_id": training_run_id,
        "exported_at": exported_at,
    }
    if graph_data_file:
        values["graph_data_file"] = graph_data_file
        values["graph_data_sha256"] = sha256_file(d / graph_data_file)
    if stride is not None:
        values["stride"] = str(stride)
    lines = [f"{k} = {values[k]}" for k in KEY_ORDER if k in values]
    (d / MANIFEST).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return values


def read_manifest(bundle_dir):
    path = Path(bundle_dir) / MANIFEST
    if not path.is_file():
        raise BundleInvalid(f"missing {path}")
    out = {}
    for n, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise BundleInvalid(f"{path}:{n}: expected key = value")
        k, v = line.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def verify_bundle(bundle_dir):
    """Same checks as the C++ loader: required keys, hashes, max_seq_len."""
    d = Path(bundle_dir)
    m = read_manifest(d)
    for key in ("backend", "graph_file", "graph_sha256", "tokenizer_file", "tokenizer_sha256", "max_seq_len"):
        if not m.get(key):
            raise BundleInvalid(f"{d}: manifest lacks {key!r}")
    if m["backend"] not in ("onnx", "oracle"):
        raise BundleInvalid(f"{d}: unknown backend {m['backend']!r}")
    if m.get("kind", "qa") not in ("qa", "embedder"):
        raise BundleInvalid(f"{d}: unknown kind {m['kind']!r}")
    pairs = [("graph_file", "graph_sha256"), ("tokenizer_file", "tokenizer_sha256")]
    if "graph_data_file" in m:
        pairs.append(("graph_data_file", "graph_data_sha256"))
    for file_key, hash_key in pairs:
        p = d / m[file_key]
        if not p.is_file():
            raise BundleInvalid(f"{p} does not exist")
        if sha256_file(p) != m.get(hash_key):
            raise BundleInvalid(f"{p}: sha256 mismatch")
    if not m["max_seq_len"].isdigit() or int(m["max_seq_len"]) < 16:
        raise BundleInvalid(f"{d}: max_seq_len must be an integer >= 16")
    return m
