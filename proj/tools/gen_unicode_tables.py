#!/usr/bin/env python3
"""Regenerates include/qaprobe/detail/unicode_tables.inc.

The evaluator normalizes text with the same semantics as CPython's
str.lower(), str.isalnum(), str.isspace() and re's \\w class, so the tables
are extracted empirically from the running interpreter rather than parsed
out of the UCD.  Run from the repository root:

    python3 tools/gen_unicode_tables.py > include/qaprobe/detail/unicode_tables.inc

Cased / Case_Ignorable sets (needed for the final-sigma rule in lower())
are probed through str.lower() itself, see below.
"""

import re
import sys
import unicodedata

MAX_CP = 0x110000
SURROGATES = range(0xD800, 0xE000)


def each_cp():
    for cp in range(MAX_CP):
        if cp in SURROGATES:
            continue
        yield cp


def ranges_of(pred):
    out = []
    for cp in each_cp():
        if pred(cp):
            if out and out[-1][1] == cp - 1:
                out[-1][1] = cp
            else:
                out.append([cp, cp])
    return out


def emit_ranges(name, rs, out):
    out.write(f"inline constexpr CpRange {name}[] = {{\n")
    for i in range(0, len(rs), 6):
        row = ", ".join("{0x%X, 0x%X}" % (lo, hi) for lo, hi in rs[i : i + 6])
        out.write("    " + row + ",\n")
    out.write("};\n")
    out.write(f"inline constexpr std::size_t {name}_count = {len(rs)};\n\n")


def main(out):
    word_re = re.compile(r"\w", re.UNICODE)

    lower_pairs = []   # 1:1 mappings, cp != lower(cp)
    lower_multi = []   # 1:N mappings (e.g. U+0130)
    for cp in each_cp():
        if cp == 0x03A3:  # capital sigma is context sensitive, handled in code
            continue
        low = chr(cp).lower()
        if low == chr(cp):
            continue
        if len(low) == 1:
            lower_pairs.append((cp, ord(low)))
        else:
            lower_multi.append((cp, [ord(c) for c in low]))

    # Cased / Case_Ignorable, probed via the final-sigma rule:
    #   lower('3' + c + 'SIGMA') ends in final sigma  iff c is cased and
    #       not case-ignorable (the backward scan stops at c),
    #   lower('a' + c + 'SIGMA') ends in final sigma  iff c is cased or
    #       case-ignorable (ignorables are skipped, then 'a' is found).
    S = "Σ"
    FINAL = "ς"

    def cased(cp):
        return ("3" + chr(cp) + S).lower()[-1] == FINAL

    def ignorable(cp):
        if cased(cp):
            return False
        return ("a" + chr(cp) + S).lower()[-1] == FINAL

    out.write("// Generated by tools/gen_unicode_tables.py -- do not edit.\n")
    out.write("// Unicode data version: %s (CPython %s)\n\n"
              % (unicodedata.unidata_version, sys.version.split()[0]))

    out.write("inline constexpr CpPair kLowerPairs[] = {\n")
    for i in range(0, len(lower_pairs), 6):
        row = ", ".join("{0x%X, 0x%X}" % p for p in lower_pairs[i : i + 6])
        out.write("    " + row + ",\n")
    out.write("};\n")
    out.write(f"inline constexpr std::size_t kLowerPairs_count = {len(lower_pairs)};\n\n")

    out.write("inline constexpr CpExpansion kLowerMulti[] = {\n")
    for cp, exp in lower_multi:
        exp3 = exp + [0] * (3 - len(exp))
        out.write("    {0x%X, {0x%X, 0x%X, 0x%X}, %d},\n" % (cp, *exp3, len(exp)))
    out.write("};\n")
    out.write(f"inline constexpr std::size_t kLowerMulti_count = {len(lower_multi)};\n\n")

    emit_ranges("kWordRanges", ranges_of(lambda cp: bool(word_re.match(chr(cp)))), out)
    emit_ranges("kSpaceRanges", ranges_of(lambda cp: chr(cp).isspace()), out)
    emit_ranges("kUpperRanges", ranges_of(lambda cp: chr(cp).isupper()), out)
    emit_ranges("kAlphaRanges", ranges_of(lambda cp: chr(cp).isalpha()), out)
    emit_ranges("kCasedRanges", ranges_of(cased), out)
    emit_ranges("kCaseIgnorableRanges", ranges_of(ignorable), out)


if __name__ == "__main__":
    main(sys.stdout)
