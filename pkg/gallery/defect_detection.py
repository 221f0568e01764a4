"""Locate and label defects in a still configuration.

A defect of a subshift of finite type is a cell where no long admissible
word can be centred: the per-cell field "largest centred admissible length"
dips to a local minimum there.  Two flavours are shown:

- interfaces between monochrome domains, labelled by the colours meeting at
  each wall;
- dislocations of the checkerboard (forbidden 00 and 11), labelled by the
  local phase on each side.
"""

from gliderlab.defects import (Decomposition, SFTSpec, classify_dislocations,
                               classify_interfaces, compute_period,
                               union_defect_field)
from gliderlab.lattice import BINARY, Alphabet, from_word

A3 = Alphabet(3)


def main():
    # three monochrome runs: 1^9 0^5 2^5 0^6
    mono = tuple(SFTSpec(A3, tuple(p for p in [(a, b) for a in range(3)
                                               for b in range(3) if a != b]
                                   + [(a, a) for a in range(3) if a != s]))
                 for s in range(3))
    word = [1] * 9 + [0] * 5 + [2] * 5 + [0] * 6
    c = from_word(A3, word, origin=-6)
    fld = union_defect_field(mono, c)
    print("monochrome field:", [int(v) for v in fld.values])
    reading = classify_interfaces(Decomposition(mono, 2), c)
    print("interfaces:", list(zip(reading.positions,
                                  reading.label_strings())))

    checker = SFTSpec(BINARY, ((0, 0), (1, 1)))
    word = [1, 0, 1, 0] + [1, 0, 1, 0, 0, 1, 0, 1, 0, 1, 1,
                           0, 1, 0, 1, 1, 0, 1] + [0, 1, 0]
    c = from_word(BINARY, word, origin=-5)
    pd = compute_period(checker)
    reading = classify_dislocations(checker, pd, c)
    print(f"\ncheckerboard period P={pd.P}")
    print("dislocations:", list(zip(reading.positions,
                                    reading.label_strings())))


if __name__ == "__main__":
    main()
