#!/usr/bin/env python3
"""Generates src/nn/unicode_tables.inc for the WordPiece tokenizer.

Covers the Basic Multilingual Plane: lower-case mapping (single code point
results only), accent folding (NFD with combining marks removed), combining
mark (Mn) ranges, punctuation (P*) ranges and control/format ranges.
"""
import sys
import unicodedata

BMP = range(0x80, 0x10000)


def ranges(pred):
    out, start = [], None
    for cp in range(0, 0x10000):
        if pred(cp):
            if start is None:
                start = cp
        elif start is not None:
            out.append((start, cp - 1))
            start = None
    if start is not None:
        out.append((start, 0xFFFF))
    return out


def cat(cp):
    return unicodedata.category(chr(cp))


lower = []
for cp in BMP:
    lo = chr(cp).lower()
    if len(lo) == 1 and ord(lo) != cp:
        lower.append((cp, ord(lo)))

fold = []
for cp in BMP:
    if 0xD800 <= cp <= 0xDFFF:
        continue
    nfd = unicodedata.normalize("NFD", chr(cp))
    stripped = "".join(c for c in nfd if unicodedata.category(c) != "Mn")
    if nfd != chr(cp) and len(stripped) == 1 and stripped != chr(cp):
        fold.append((cp, ord(stripped)))

mn = ranges(lambda cp: cat(cp) == "Mn")
punct = ranges(lambda cp: cat(cp).startswith("P"))
control = ranges(lambda cp: cat(cp) in ("Cc", "Cf"))


def emit_pairs(name, pairs):
    lines = [f"inline constexpr CodePair {name}[] = {{"]
    for a, b in pairs:
        lines.append(f"    {{0x{a:04X}, 0x{b:04X}}},")
    lines.append("};")
    return "\n".join(lines)


def emit_ranges(name, rs):
    lines = [f"inline constexpr CodeRange {name}[] = {{"]
    for a, b in rs:
        lines.append(f"    {{0x{a:04X}, 0x{b:04X}}},")
    lines.append("};")
    return "\n".join(lines)


out = [
    "// Generated by tools/gen_unicode_tables.py (Unicode " + unicodedata.unidata_version + "). Do not edit.",
    "",
    emit_pairs("kLowerPairs", lower),
    "",
    emit_pairs("kFoldPairs", fold),
    "",
    emit_ranges("kNonspacingMarkRanges", mn),
    "",
    emit_ranges("kPunctuationRanges", punct),
    "",
    emit_ranges("kControlRanges", control),
    "",
]
path = sys.argv[1] if len(sys.argv) > 1 else "src/nn/unicode_tables.inc"
with open(path, "w", encoding="utf-8") as f:
    f.write("\n".join(out))
