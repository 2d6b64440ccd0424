from typing import Annotated

import numpy as np
from pydantic import BeforeValidator, PlainSerializer


def _as_float_array(v):
    return np.asarray(v, dtype=float)


def _as_int_array(v):
    return np.asarray(v, dtype=np.int64)


def _to_list(a: np.ndarray) -> list:
    return a.tolist()


FloatArray = Annotated[
    np.ndarray,
    BeforeValidator(_as_float_array),
    PlainSerializer(_to_list, return_type=list),
]

IntArray = Annotated[
    np.ndarray,
    BeforeValidator(_as_int_array),
    PlainSerializer(_to_list, return_type=list),
]
