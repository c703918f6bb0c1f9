#!/usr/bin/env python3
"""Regenerates src/unicode_data.inc from the Unicode character database.

Emits three sorted tables consumed by src/unicode_norm.cpp:
  - canonical decompositions (excluding the algorithmic Hangul block)
  - nonzero canonical combining classes
  - primary composition pairs (composition exclusions already applied)

Run from the repo root:  python3 scripts/gen_unicode_data.py
"""

import sys
import unicodedata

MAX_CP = 0x110000
HANGUL_S_BASE = 0xAC00
HANGUL_S_COUNT = 11172


def is_hangul_syllable(cp):
    return HANGUL_S_BASE <= cp < HANGUL_S_BASE + HANGUL_S_COUNT


def main(out_path):
    decomps = []  # (cp, first, second)  second == 0 for singletons
    cccs = []     # (cp, ccc)
    comps = []    # (first, second, composed)

    for cp in range(MAX_CP):
        if 0xD800 <= cp <= 0xDFFF:
            continue
        ch = chr(cp)

        ccc = unicodedata.combining(ch)
        if ccc != 0:
            cccs.append((cp, ccc))

        if is_hangul_syllable(cp):
            continue
        raw = unicodedata.decomposition(ch)
        if not raw or raw.startswith("<"):
            continue  # no decomposition, or a compatibility one
        parts = [int(p, 16) for p in raw.split()]
        if len(parts) == 1:
            decomps.append((cp, parts[0], 0))
        elif len(parts) == 2:
            decomps.append((cp, parts[0], parts[1]))
            # A pair is a primary composite iff NFC maps the decomposition
            # back to it (this folds in the composition exclusions).
            if unicodedata.normalize("NFC", chr(parts[0]) + chr(parts[1])) == ch:
                comps.append((parts[0], parts[1], cp))
        else:
            raise AssertionError(f"canonical decomposition of len {len(parts)} at U+{cp:04X}")

    comps.sort(key=lambda t: (t[0], t[1]))

    with open(out_path, "w") as f:
        f.write("// Generated by scripts/gen_unicode_data.py -- do not edit.\n")
        f.write(f"// Unicode character database version {unicodedata.unidata_version}\n\n")

        f.write(f"static const CanonDecomp kCanonDecomp[{len(decomps)}] = {{\n")
        for cp, a, b in decomps:
            f.write(f"  {{0x{cp:X}, 0x{a:X}, 0x{b:X}}},\n")
        f.write("};\n\n")

        f.write(f"static const CombiningClass kCombiningClass[{len(cccs)}] = {{\n")
        for cp, c in cccs:
            f.write(f"  {{0x{cp:X}, {c}}},\n")
        f.write("};\n\n")

        f.write(f"static const CompPair kCompPair[{len(comps)}] = {{\n")
        for a, b, c in comps:
            f.write(f"  {{0x{a:X}, 0x{b:X}, 0x{c:X}}},\n")
        f.write("};\n")

    print(f"wrote {out_path}: {len(decomps)} decompositions, "
          f"{len(cccs)} combining classes, {len(comps)} composition pairs")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "src/unicode_data.inc")
