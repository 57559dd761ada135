import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from pfk.terms import KIND, TYPE, App, Const, Lam, Pi, Var

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

VAR_NAMES = ("x", "y", "z", "x'", "w")
CONST_NAMES = ("c", "d", "El", "nat", "o")


def raw_terms(max_leaves=12, sorts=True):
    """Untyped terms over a small vocabulary, so binders often clash."""
    leaves = st.one_of(
        st.sampled_from(VAR_NAMES).map(Var),
        st.sampled_from(CONST_NAMES).map(Const),
        *([st.sampled_from([TYPE, KIND])] if sorts else []),
    )

    def extend(sub):
        name = st.sampled_from(VAR_NAMES)
        return st.one_of(
            st.builds(App, sub, sub),
            st.builds(Lam, name, sub, sub),
            st.builds(Pi, name, sub, sub),
        )

    return st.recursive(leaves, extend, max_leaves=max_leaves)


@pytest.fixture(scope="session")
def corpus_dir():
    from pfk.corpus import CORPUS_DIR

    return CORPUS_DIR
