from .combmap import CombMap, InvalidMap, flip_word, normalize_word, spins_to_word, word_to_spins
from .enumerate import DEFAULT_CAP, CapExceeded, enumerate_maps
from .oracle import count_maps, min_degree, oracle_Q, oracle_series, oracle_sphere

__all__ = [
    "CombMap",
    "InvalidMap",
    "flip_word",
    "normalize_word",
    "spins_to_word",
    "word_to_spins",
    "DEFAULT_CAP",
    "CapExceeded",
    "enumerate_maps",
    "count_maps",
    "min_degree",
    "oracle_Q",
    "oracle_series",
    "oracle_sphere",
]
