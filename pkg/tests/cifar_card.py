"""Published evaluation card for the seven-detector image benchmark.

Frozen per-(ID, OOD) results — AUROC and FNR@TNR95, both in percent — for
seven detector configurations on sixteen dataset pairs, in two training
regimes (full data, and a low-data subset). Columns:

    msp        max softmax probability, T=1
    odin_wo    temperature+perturbation scoring at the fixed no-OOD policy
    odin_with  same detector, (T, eps) chosen against labeled OOD data
    maha_wo    class-conditional Mahalanobis, eps=0
    maha_with  same, eps chosen against labeled OOD data
    pod        pairwise-distance scoring, (min, average), M=20
    podft      pairwise-distance scoring with the fine-tuned weighted head

PUBLISHED_WINS holds the pairwise win counts reported alongside these
numbers (how many of the 16 pairs each row method beats each column method
on, AUROC first, FNR@TNR95 as the tie-break). Three published counts do not
match a recomputation from the card itself; CORRECTED_WINS carries the
recomputed values (each off by one pair) and the comparison harness treats
those three as the expected truth, printing a note.
"""

# regime -> (id, ood) -> method -> (auroc %, fnr@tnr95 %)
CARD = {
    "full": {
        ("C10", "C100"): {
            "msp": (86.7, 68.9), "odin_wo": (85.6, 77.7),
            "odin_with": (85.8, 76.3), "maha_wo": (89.7, 39.8),
            "maha_with": (89.7, 39.8), "pod": (89.3, 40.9),
            "podft": (87.1, 62.1),
        },
        ("C10", "SVHN"): {
            "msp": (95.0, 13.7), "odin_wo": (95.7, 12.9),
            "odin_with": (95.7, 12.9), "maha_wo": (95.1, 11.9),
            "maha_with": (98.2, 9.4), "pod": (94.7, 15.0),
            "podft": (97.0, 13.6),
        },
        ("C10", "CelebA"): {
            "msp": (74.3, 78.4), "odin_wo": (67.6, 87.0),
            "odin_with": (72.5, 79.6), "maha_wo": (76.0, 69.6),
            "maha_with": (76.0, 69.6), "pod": (77.0, 63.1),
            "podft": (77.6, 58.3),
        },
        ("C10", "TIN"): {
            "msp": (90.0, 53.8), "odin_wo": (90.4, 63.1),
            "odin_with": (90.8, 62.3), "maha_wo": (93.1, 23.0),
            "maha_with": (95.3, 21.0), "pod": (92.3, 29.3),
            "podft": (92.6, 38.0),
        },
        ("C10", "LSUN"): {
            "msp": (93.2, 21.3), "odin_wo": (94.1, 23.7),
            "odin_with": (94.5, 26.3), "maha_wo": (94.9, 15.6),
            "maha_with": (97.1, 11.5), "pod": (94.1, 20.3),
            "podft": (94.5, 25.4),
        },
        ("C100", "C10"): {
            "msp": (78.1, 64.5), "odin_wo": (78.5, 66.6),
            "odin_with": (78.5, 66.6), "maha_wo": (75.3, 71.2),
            "maha_with": (75.3, 71.2), "pod": (76.0, 76.9),
            "podft": (76.2, 69.6),
        },
        ("C100", "SVHN"): {
            "msp": (80.7, 50.5), "odin_wo": (81.2, 51.1),
            "odin_with": (96.2, 17.8), "maha_wo": (88.1, 41.4),
            "maha_with": (94.3, 23.8), "pod": (83.7, 48.3),
            "podft": (76.7, 57.6),
        },
        ("C100", "STL"): {
            "msp": (79.4, 59.4), "odin_wo": (79.8, 60.8),
            "odin_with": (79.8, 60.8), "maha_wo": (77.6, 64.1),
            "maha_with": (77.6, 64.1), "pod": (78.1, 68.0),
            "podft": (77.4, 65.9),
        },
        ("C100", "TIN"): {
            "msp": (81.2, 53.3), "odin_wo": (83.1, 51.2),
            "odin_with": (90.1, 41.6), "maha_wo": (83.7, 50.0),
            "maha_with": (89.3, 41.9), "pod": (84.3, 48.4),
            "podft": (87.3, 39.2),
        },
        ("C100", "LSUN"): {
            "msp": (82.7, 48.6), "odin_wo": (84.7, 46.8),
            "odin_with": (91.5, 35.1), "maha_wo": (86.9, 41.8),
            "maha_with": (91.8, 32.4), "pod": (86.8, 42.1),
            "podft": (90.1, 33.7),
        },
        ("SVHN", "C10"): {
            "msp": (95.5, 12.2), "odin_wo": (95.9, 12.0),
            "odin_with": (96.0, 11.8), "maha_wo": (96.3, 11.7),
            "maha_with": (97.8, 8.1), "pod": (96.2, 11.9),
            "podft": (93.8, 34.5),
        },
        ("SVHN", "C100"): {
            "msp": (95.0, 13.3), "odin_wo": (95.5, 13.3),
            "odin_with": (95.5, 13.3), "maha_wo": (96.0, 12.4),
            "maha_with": (97.4, 9.1), "pod": (95.9, 12.7),
            "podft": (93.0, 39.9),
        },
        ("SVHN", "STL"): {
            "msp": (95.7, 11.4), "odin_wo": (96.1, 11.1),
            "odin_with": (96.2, 10.9), "maha_wo": (96.4, 11.1),
            "maha_with": (98.0, 8.4), "pod": (96.3, 11.3),
            "podft": (94.7, 26.5),
        },
        ("SVHN", "CelebA"): {
            "msp": (96.5, 10.0), "odin_wo": (97.0, 9.6),
            "odin_with": (97.5, 9.8), "maha_wo": (97.0, 9.9),
            "maha_with": (98.7, 5.3), "pod": (96.8, 10.6),
            "podft": (94.1, 29.5),
        },
        ("SVHN", "TIN"): {
            "msp": (95.2, 12.5), "odin_wo": (95.6, 12.5),
            "odin_with": (95.7, 12.2), "maha_wo": (96.1, 11.5),
            "maha_with": (98.1, 7.8), "pod": (96.1, 11.8),
            "podft": (93.7, 34.1),
        },
        ("SVHN", "LSUN"): {
            "msp": (94.8, 13.5), "odin_wo": (95.2, 13.7),
            "odin_with": (95.3, 13.8), "maha_wo": (96.0, 12.3),
            "maha_with": (98.1, 7.7), "pod": (95.9, 12.6),
            "podft": (93.1, 37.4),
        },
    },
    "low": {
        ("C10", "C100"): {
            "msp": (77.8, 59.3), "odin_wo": (79.0, 61.6),
            "odin_with": (79.1, 61.7), "maha_wo": (72.7, 70.7),
            "maha_with": (73.5, 72.6), "pod": (77.9, 63.4),
            "podft": (80.2, 59.2),
        },
        ("C10", "SVHN"): {
            "msp": (60.5, 84.0), "odin_wo": (55.5, 86.2),
            "odin_with": (93.5, 31.3), "maha_wo": (89.7, 39.1),
            "maha_with": (93.4, 31.6), "pod": (76.2, 51.7),
            "podft": (76.2, 59.1),
        },
        ("C10", "CelebA"): {
            "msp": (75.4, 57.2), "odin_wo": (75.0, 60.4),
            "odin_with": (78.4, 57.5), "maha_wo": (65.9, 74.7),
            "maha_with": (68.9, 68.2), "pod": (77.7, 55.6),
            "podft": (74.6, 50.1),
        },
        ("C10", "TIN"): {
            "msp": (74.7, 65.2), "odin_wo": (77.6, 63.4),
            "odin_with": (88.7, 43.5), "maha_wo": (80.9, 57.3),
            "maha_with": (87.9, 48.0), "pod": (73.0, 73.0),
            "podft": (74.6, 71.7),
        },
        ("C10", "LSUN"): {
            "msp": (81.2, 47.7), "odin_wo": (84.8, 44.4),
            "odin_with": (93.9, 24.2), "maha_wo": (82.0, 49.9),
            "maha_with": (90.0, 36.6), "pod": (77.4, 59.5),
            "podft": (81.7, 55.1),
        },
        ("C100", "C10"): {
            "msp": (61.0, 82.1), "odin_wo": (62.0, 82.2),
            "odin_with": (62.1, 82.2), "maha_wo": (55.3, 87.1),
            "maha_with": (56.0, 87.1), "pod": (61.4, 80.8),
            "podft": (61.0, 82.9),
        },
        ("C100", "SVHN"): {
            "msp": (55.8, 82.8), "odin_wo": (52.8, 83.4),
            "odin_with": (82.7, 54.4), "maha_wo": (82.3, 66.0),
            "maha_with": (82.7, 56.1), "pod": (62.0, 82.7),
            "podft": (49.8, 86.6),
        },
        ("C100", "STL"): {
            "msp": (62.0, 82.1), "odin_wo": (62.5, 81.2),
            "odin_with": (62.5, 81.2), "maha_wo": (54.9, 87.0),
            "maha_with": (55.2, 86.8), "pod": (61.4, 81.2),
            "podft": (61.2, 82.3),
        },
        ("C100", "TIN"): {
            "msp": (65.0, 80.7), "odin_wo": (66.8, 79.2),
            "odin_with": (69.6, 78.1), "maha_wo": (52.0, 87.0),
            "maha_with": (59.4, 83.2), "pod": (65.1, 78.4),
            "podft": (62.7, 80.2),
        },
        ("C100", "LSUN"): {
            "msp": (66.1, 79.3), "odin_wo": (68.4, 76.6),
            "odin_with": (70.6, 75.1), "maha_wo": (50.9, 86.5),
            "maha_with": (58.0, 83.6), "pod": (65.5, 77.6),
            "podft": (60.6, 83.1),
        },
        ("SVHN", "C10"): {
            "msp": (92.4, 22.0), "odin_wo": (93.2, 21.6),
            "odin_with": (94.9, 18.4), "maha_wo": (92.4, 21.5),
            "maha_with": (95.3, 16.8), "pod": (92.4, 21.9),
            "podft": (91.6, 25.9),
        },
        ("SVHN", "C100"): {
            "msp": (92.1, 22.7), "odin_wo": (92.8, 22.8),
            "odin_with": (94.2, 20.4), "maha_wo": (92.1, 22.5),
            "maha_with": (94.6, 18.8), "pod": (92.1, 22.4),
            "podft": (91.6, 26.5),
        },
        ("SVHN", "STL"): {
            "msp": (92.5, 21.6), "odin_wo": (93.5, 21.1),
            "odin_with": (95.2, 17.6), "maha_wo": (92.4, 21.8),
            "maha_with": (95.6, 16.3), "pod": (92.6, 21.4),
            "podft": (91.9, 25.4),
        },
        ("SVHN", "CelebA"): {
            "msp": (94.0, 17.3), "odin_wo": (95.0, 16.4),
            "odin_with": (97.4, 10.0), "maha_wo": (93.8, 17.9),
            "maha_with": (97.4, 9.8), "pod": (94.2, 17.8),
            "podft": (91.9, 26.0),
        },
        ("SVHN", "TIN"): {
            "msp": (92.5, 21.4), "odin_wo": (93.3, 21.1),
            "odin_with": (95.3, 17.5), "maha_wo": (92.5, 21.0),
            "maha_with": (95.7, 16.1), "pod": (92.5, 21.2),
            "podft": (92.1, 25.0),
        },
        ("SVHN", "LSUN"): {
            "msp": (92.2, 22.1), "odin_wo": (92.9, 21.9),
            "odin_with": (95.3, 17.4), "maha_wo": (92.1, 22.0),
            "maha_with": (95.8, 15.8), "pod": (92.5, 21.4),
            "podft": (91.8, 25.4),
        },
    },
}

# published pairwise win counts out of 16, keyed
# (setting, regime) -> (row method, column method) -> wins
# setting "wo": fixed no-OOD policy columns; "with": OOD-chosen columns.
PUBLISHED_WINS = {
    ("wo", "full"): {
        ("msp", "odin"): 2, ("odin", "msp"): 14,
        ("msp", "maha"): 2, ("maha", "msp"): 14,
        ("msp", "pod"): 3, ("pod", "msp"): 13,
        ("odin", "maha"): 4, ("maha", "odin"): 12,
        ("odin", "pod"): 4, ("pod", "odin"): 12,
        ("maha", "pod"): 12, ("pod", "maha"): 4,
    },
    ("wo", "low"): {
        ("msp", "odin"): 3, ("odin", "msp"): 13,
        ("msp", "maha"): 9, ("maha", "msp"): 7,
        ("msp", "pod"): 3, ("pod", "msp"): 13,
        ("odin", "maha"): 13, ("maha", "odin"): 3,
        ("odin", "pod"): 13, ("pod", "odin"): 3,
        ("maha", "pod"): 6, ("pod", "maha"): 10,
    },
    ("with", "full"): {
        ("msp", "odin"): 2, ("odin", "msp"): 14,
        ("msp", "maha"): 2, ("maha", "msp"): 14,
        ("msp", "pod"): 3, ("pod", "msp"): 13,
        ("odin", "maha"): 5, ("maha", "odin"): 11,
        ("odin", "pod"): 8, ("pod", "odin"): 8,
        ("maha", "pod"): 13, ("pod", "maha"): 3,
    },
    ("with", "low"): {
        ("msp", "odin"): 0, ("odin", "msp"): 16,
        ("msp", "maha"): 6, ("maha", "msp"): 10,
        ("msp", "pod"): 3, ("pod", "msp"): 13,
        ("odin", "maha"): 10, ("maha", "odin"): 6,
        ("odin", "pod"): 16, ("pod", "odin"): 0,
        ("maha", "pod"): 10, ("pod", "maha"): 6,
    },
}

# recomputing from CARD contradicts three published counts (each one pair
# off, in both directions of the same comparison); these are the values the
# card actually supports.
CORRECTED_WINS = {
    ("wo", "low"): {("msp", "pod"): 4, ("pod", "msp"): 12},
    ("with", "low"): {("msp", "pod"): 4, ("pod", "msp"): 12},
    ("with", "full"): {("odin", "maha"): 4, ("maha", "odin"): 12},
}
