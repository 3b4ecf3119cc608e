import argparse
import json
import sys

from .export import export_bundle
from .schemas import MissingSpan, load_examples, prepare_training_examples, write_examples
from .train import Checkpoint, TrainingConfig, fine_tune


def main(argv=None):
    p = argparse.ArgumentParser(prog="train_export")
    sub = p.add_subparsers(dest="cmd", required=True)

    prep = sub.add_parser("prepare", help="corpus + splits -> training examples")
    prep.add_argument("--corpus", required=True)
    prep.add_argument("--splits", required=True)
    prep.add_argument("--split", default="train")
    prep.add_argument("--out", required=True)

    tr = sub.add_parser("train", help="fine-tune on prepared examples")
    tr.add_argument("--examples", required=True)
    tr.add_argument("--validation")
    tr.add_argument("--tokenizer", required=True)
    tr.add_argument("--out", required=True, help="checkpoint directory")
    defaults = TrainingConfig()
    for name, value in vars(defaults).items():
        tr.add_argument("--" + name.replace("_", "-"), type=type(value), default=value)

    ex = sub.add_parser("export", help="checkpoint -> model bundle")
    ex.add_argument("--checkpoint", required=True)
    ex.add_argument("--out", required=True)
    ex.add_argument("--kind", choices=["qa", "embedder"], default="qa")
    ex.add_argument("--model-name")

    args = p.parse_args(argv)
    try:
        if args.cmd == "prepare":
            examples = prepare_training_examples(args.corpus, args.splits, args.split)
            write_examples(args.out, examples)
            print(f"examples {len(examples)}")
        elif args.cmd == "train":
            cfg = TrainingConfig(**{k: getattr(args, k) for k in vars(defaults)})
            val = load_examples(args.validation) if args.validation else None
            ckpt = fine_tune(load_examples(args.examples), cfg, args.tokenizer, validation=val,
                             log=lambda m: print(m, file=sys.stderr))
            ckpt.save(args.out)
            print(json.dumps({"epoch_losses": ckpt.epoch_losses, "run_id": ckpt.run_id}))
        else:
            worst = export_bundle(Checkpoint.load(args.checkpoint), args.out, args.kind, args.model_name)
            print(f"exported {args.out} (max parity difference {worst:.2e})")
    except MissingSpan as e:
        print(f"{e.code}: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
