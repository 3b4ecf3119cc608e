#!/usr/bin/env python3
"""Emits the code point ranges for \\p{L} and \\p{N} used by the BPE pre-tokenizer."""
import sys
import unicodedata


def ranges(pred):
    out, start, prev = [], None, None
    for cp in range(0x110000):
        if pred(cp):
            if start is None:
                start = cp
            prev = cp
        elif start is not None:
            out.append((start, prev))
            start = None
    if start is not None:
        out.append((start, prev))
    return out


def emit(name, rs):
    lines = [f"constexpr CodepointRange {name}[] = {{"]
    row = []
    for a, b in rs:
        row.append(f"{{0x{a:X}, 0x{b:X}}}")
        if len(row) == 6:
            lines.append("    " + ", ".join(row) + ",")
            row = []
    if row:
        lines.append("    " + ", ".join(row) + ",")
    lines.append("};")
    return "\n".join(lines)


cat = lambda cp: unicodedata.category(chr(cp))
print(f"// Generated by tools/scripts/gen_unicode_tables.py (Unicode {unicodedata.unidata_version}).")
print("// Do not edit.")
print(emit("kLetterRanges", ranges(lambda cp: cat(cp).startswith("L"))))
print(emit("kNumberRanges", ranges(lambda cp: cat(cp).startswith("N"))))
