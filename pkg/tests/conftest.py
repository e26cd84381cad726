import hypothesis.strategies as st
import numpy as np

from sldl import DeltaNodes, GeneralTriple, StepSigma

_ENTRY = st.floats(min_value=-3.0, max_value=3.0, allow_nan=False, allow_infinity=False)


@st.composite
def complex_matrices(draw, n=None, bound=3.0):
    if n is None:
        n = draw(st.integers(1, 4))
    ent = st.floats(min_value=-bound, max_value=bound,
                    allow_nan=False, allow_infinity=False)
    re = draw(st.lists(st.lists(ent, min_size=n, max_size=n), min_size=n, max_size=n))
    im = draw(st.lists(st.lists(ent, min_size=n, max_size=n), min_size=n, max_size=n))
    return np.array(re) + 1j * np.array(im)


@st.composite
def symmetric_matrices(draw, n=None, bound=3.0):
    if n is None:
        n = draw(st.integers(1, 3))
    ent = st.floats(min_value=-bound, max_value=bound,
                    allow_nan=False, allow_infinity=False)
    raw = draw(st.lists(st.lists(ent, min_size=n, max_size=n), min_size=n, max_size=n))
    a = np.array(raw)
    return (a + a.T) / 2.0


@st.composite
def step_sigma_models(draw, max_n=3, max_pieces=4):
    n = draw(st.integers(1, max_n))
    pieces = draw(st.integers(1, max_pieces))
    widths = draw(st.lists(st.floats(0.2, 1.5), min_size=pieces, max_size=pieces))
    cuts = [0.0]
    for w in widths[:-1]:
        cuts.append(cuts[-1] + w)
    X = cuts[-1] + widths[-1]
    values = [draw(symmetric_matrices(n)) for _ in range(pieces)]
    return StepSigma(n, tuple(cuts), tuple(values), X)


@st.composite
def delta_models(draw, max_n=3, max_nodes=5, jump_bound=3.0):
    n = draw(st.integers(1, max_n))
    count = draw(st.integers(1, max_nodes))
    gaps = draw(st.lists(st.floats(0.2, 1.5), min_size=count + 1, max_size=count + 1))
    nodes = list(np.cumsum(gaps[:-1]))
    X = nodes[-1] + gaps[-1]
    jumps = [draw(symmetric_matrices(n, jump_bound)) for _ in range(count)]
    return DeltaNodes(n, tuple(nodes), tuple(jumps), X)


@st.composite
def general_triple_models(draw, max_n=2, max_pieces=3):
    n = draw(st.integers(1, max_n))
    pieces = draw(st.integers(1, max_pieces))
    widths = draw(st.lists(st.floats(0.3, 1.0), min_size=pieces, max_size=pieces))
    cuts = [0.0]
    for w in widths[:-1]:
        cuts.append(cuts[-1] + w)
    X = cuts[-1] + widths[-1]
    P, Q, R = [], [], []
    for _ in range(pieces):
        a = draw(complex_matrices(n, 1.0))
        P.append(a @ a.conj().T + np.eye(n))  # Hermitian, safely invertible
        Q.append(draw(symmetric_matrices(n, 2.0)))
        R.append(draw(complex_matrices(n, 1.0)))
    return GeneralTriple(n, tuple(cuts), tuple(P), tuple(Q), tuple(R), X)


def random_symmetric(rng, n, bound):
    a = rng.uniform(-bound, bound, (n, n))
    return (a + a.T) / 2.0
