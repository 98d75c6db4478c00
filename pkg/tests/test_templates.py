from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from hyperpctl import check, prepare
from hyperpctl.model import Dtmc
from hyperpctl.templates import (
    TemplateError, bisimulation, causation, differential_privacy, noninterference,
    output_noninterference, qif,
)

from oracles import coarsest_bisimulation, is_bisimulation, make_rng, random_chain

F = Fraction
HALF = F(1, 2)

# s -> {x, z} and t -> {x', z'}, each with probability 1/2; x, x' carry p and
# z, z' carry q.  {s,t}, {x,x'}, {z,z'} is a bisimulation.
FORK = Dtmc(
    6,
    [(0, 2, HALF), (0, 3, HALF), (1, 4, HALF), (1, 5, HALF),
     (2, 2, 1), (3, 3, 1), (4, 4, 1), (5, 5, 1)],
    {2: {"p"}, 4: {"p"}, 3: {"q"}, 5: {"q"}},
)
FORK_PARTITION = [[0, 1], [2, 4], [3, 5]]


# -- bisimulation ---------------------------------------------------------------


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**9), st.integers(1, 5))
def test_discrete_partition_is_a_bisimulation(seed, size):
    m = random_chain(make_rng(seed), size)
    aug, text = bisimulation(m, [[s] for s in range(size)])
    assert check(aug, text).satisfied


def test_label_mismatch():
    m = Dtmc(2, [(0, 0, 1), (1, 1, 1)], {0: {"b"}})
    aug, text = bisimulation(m, [[0, 1]])
    assert not check(aug, text).satisfied
    assert not is_bisimulation(m, [[0, 1]])


def test_coarse_partition_with_equal_distributions():
    # 0 and 1: same label, each half to block {2} and half to block {3}
    m = Dtmc(
        4,
        [(0, 2, HALF), (0, 3, HALF), (1, 3, HALF), (1, 2, HALF), (2, 2, 1), (3, 3, 1)],
        {0: {"a"}, 1: {"a"}, 2: {"b"}},
    )
    aug, text = bisimulation(m, [[0, 1], [2], [3]])
    assert check(aug, text).satisfied
    assert is_bisimulation(m, [[0, 1], [2], [3]])
    assert coarsest_bisimulation(m) == [[0, 1], [2], [3]]


def test_augmented_labels():
    aug, text = bisimulation(FORK, FORK_PARTITION)
    assert aug.atomic_props == ("blk1", "blk2", "blk3", "p", "q")
    assert aug.labels[4] == {"p", "blk2"}
    assert prepare(text).n == 2


def test_literal_form_rejects_a_genuine_bisimulation():
    assert is_bisimulation(FORK, FORK_PARTITION)
    aug, text = bisimulation(FORK, FORK_PARTITION)
    assert check(aug, text).satisfied
    # the joint run from (s, t) can sit in (x, z'), which share no block
    aug, literal = bisimulation(FORK, FORK_PARTITION, literal=True)
    assert "P(G" in literal
    assert not check(aug, literal).satisfied


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**9), st.integers(1, 4))
def test_literal_form_implies_bisimulation(seed, size):
    rng = make_rng(seed)
    m = random_chain(rng, size, props=("a",), max_degree=2)
    part = coarsest_bisimulation(m) if rng.random() < 0.5 else [list(range(size))]
    aug, literal = bisimulation(m, part, literal=True)
    if check(aug, literal).satisfied:
        assert is_bisimulation(m, part)


def test_partition_errors():
    with pytest.raises(TemplateError, match="not covered"):
        bisimulation(FORK, [[0, 1], [2, 3]])
    with pytest.raises(TemplateError, match="appears in blocks"):
        bisimulation(FORK, [[0, 1, 2], [2, 3, 4, 5]])
    with pytest.raises(TemplateError, match="not a state"):
        bisimulation(FORK, [[0, 1, 2, 3, 4, 5, 6]])
    with pytest.raises(TemplateError, match="empty"):
        bisimulation(FORK, [[0, 1, 2, 3, 4, 5], []])
    clash = Dtmc(1, [(0, 0, 1)], {0: {"blk1"}})
    with pytest.raises(TemplateError, match="already occur"):
        bisimulation(clash, [[0]])


# -- noninterference ----------------------------------------------------------

SYMMETRIC = Dtmc(3, [(0, 2, 1), (1, 2, 1), (2, 2, 1)], {0: {"init"}, 1: {"init"}, 2: {"l"}})


def test_noninterference_symmetric_chain():
    text = noninterference("l", guard="init")
    assert text == "forall s. forall t. (init@s & init@t) => (P(G (P(X l@s) = P(X l@t))) = 1)"
    assert check(SYMMETRIC, text).satisfied
    assert check(SYMMETRIC, noninterference("l")).satisfied


def test_noninterference_single_state():
    m = Dtmc(1, [(0, 0, 1)], {0: {"l"}})
    assert check(m, noninterference("l")).satisfied


def test_noninterference_scheduler(scheduler):
    for low in ("l=1", "l=2"):
        assert not check(scheduler, noninterference(low, guard="init")).satisfied
    v = check(scheduler, output_noninterference(["l=1", "l=2"], guard="init"))
    assert not v.satisfied
    assert [s for _, _, s in v.counterexample] == [0, 1]


# -- quantitative information flow ----------------------------------------------

# high inputs h0, h1 (states 0, 1); outputs o0, o1 (states 2, 3)
COPY = Dtmc(4, [(0, 2, 1), (1, 3, 1), (2, 2, 1), (3, 3, 1)],
            {0: {"hi"}, 1: {"hi"}, 2: {"o0"}, 3: {"o1"}})
CONSTANT = Dtmc(4, [(0, 2, 1), (1, 2, 1), (2, 2, 1), (3, 3, 1)],
                {0: {"hi"}, 1: {"hi"}, 2: {"o0"}, 3: {"o1"}})


def test_qif_bound_one_is_vacuous():
    assert check(CONSTANT, "forall s. P(F o0@s) <= 1").satisfied
    assert check(CONSTANT, qif(["o0"], 1, guard="hi")).satisfied


def test_qif_copy_program_leaks():
    assert not check(COPY, qif(["o0", "o1"], F(1, 2), guard="hi")).satisfied
    # it is the bound conjunct that fails: each output is certain from its input
    assert not check(COPY, "forall s. hi@s => (P(F o0@s) <= 1/2 & P(F o1@s) <= 1/2)").satisfied


def test_qif_constant_program_equal_outputs():
    assert check(CONSTANT, qif(["o0", "o1"], 1, guard="hi")).satisfied


# -- differential privacy -------------------------------------------------------


def test_randomized_response(rr):
    ry = "P(F r=y@s)"
    v = check(rr, "forall s. true", probes=[ry])
    start_y = rr.states_with("t=y")[0]
    start_n = rr.states_with("t=n")[0]
    assert v.probes[ry][(start_y,)] == F(3, 4)
    assert v.probes[ry][(start_n,)] == F(1, 4)
    for out in ("r=y", ("r=n", "r=y")):
        assert check(rr, differential_privacy(3, ("t=n", "t=y"), out)).satisfied
        assert not check(rr, differential_privacy(2, ("t=n", "t=y"), out)).satisfied


def test_dp_factor_one_on_identical_outputs():
    assert check(CONSTANT, differential_privacy(1, ("hi", "hi"), "o0")).satisfied


def test_dp_rejects_bad_factor():
    with pytest.raises(TemplateError):
        differential_privacy(0, ("a", "b"), "o")


# -- causation ------------------------------------------------------------------

# 0 (cause start) reaches e through a c-state with 3/4; 1 (no cause) with 1/4
CAUSAL = Dtmc(
    5,
    [(0, 2, F(3, 4)), (0, 4, F(1, 4)), (2, 3, 1), (1, 3, F(1, 4)), (1, 4, F(3, 4)),
     (3, 3, 1), (4, 4, 1)],
    {0: {"c", "cs"}, 1: {"ns"}, 2: {"c"}, 3: {"e"}},
)


def test_causation_guarded():
    v = check(CAUSAL, causation("c", "e", guard=("cs", "ns")), probes=["P(c@s U e@s)", "P(!c@t U e@t)"])
    assert v.satisfied
    assert v.probes["P(c@s U e@s)"][(0, 1)] == F(3, 4)
    assert v.probes["P(!c@t U e@t)"][(0, 1)] == F(1, 4)


def test_causation_unguarded_fails_with_reachable_effect():
    assert not check(CAUSAL, causation("c", "e")).satisfied


def test_causation_without_cause_or_effect():
    m = Dtmc(2, [(0, 1, 1), (1, 1, 1)], {0: {"x"}})
    assert not check(m, causation("c", "e")).satisfied


def test_causation_screened_shape():
    text = causation("c", "e", screened=True, guard=("cs", "ns"), props=CAUSAL.atomic_props)
    info = prepare(text)
    assert info.n == 3
    assert "cs@u" in text and "ns@u" in text and "c@u" in text
    # no u reaches e through (a & c)-states with probability 3/4 for every a
    assert check(CAUSAL, text).satisfied


def test_causation_errors():
    with pytest.raises(TemplateError):
        causation("c", "c")


# -- shared properties ------------------------------------------------------------


@pytest.mark.parametrize(
    "make, n",
    [
        (lambda: noninterference("l"), 2),
        (lambda: noninterference("l", guard="init"), 2),
        (lambda: output_noninterference(["l=1", "l=2"], guard="init"), 2),
        (lambda: qif(["o"], F(1, 3)), 2),
        (lambda: qif(["o"], F(1, 3), guard=("g", "h")), 2),
        (lambda: differential_privacy(F(5, 2), ("p", "q"), "o"), 2),
        (lambda: causation("c", "e"), 2),
        (lambda: causation("c", "e", screened=True, props=("a", "c", "e")), 3),
        (lambda: bisimulation(FORK, FORK_PARTITION)[1], 2),
        (lambda: bisimulation(FORK, FORK_PARTITION, literal=True)[1], 2),
    ],
)
def test_templates_are_pure_sentences(make, n):
    text = make()
    assert text == make()
    assert prepare(text).n == n
