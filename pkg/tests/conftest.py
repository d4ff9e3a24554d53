import numpy as np
import pytest

from mshg import ddv, params, qt


@pytest.fixture(scope="session")
def pipe_a2():
    """alpha=2, s=0.5, k=0.1: the workhorse configuration."""
    p = params.derive_scales(2.0, s=0.5, k=0.1)
    cf = ddv.solve_ddv(p)
    q = qt.build_q(cf, 160)
    return p, cf, q


@pytest.fixture(scope="session")
def pipe_a3():
    """alpha=3, s=0.5, k=0.1: the Wronskian acceptance configuration."""
    p = params.derive_scales(3.0, s=0.5, k=0.1)
    cf = ddv.solve_ddv(p)
    q = qt.build_q(cf, 240)
    return p, cf, q


@pytest.fixture(scope="session")
def tfam_a2(pipe_a2):
    _, _, q = pipe_a2
    return qt.t_family(q, 3.0)


@pytest.fixture(scope="session")
def kernel_a2(tfam_a2):
    from mshg import mshg_field
    return mshg_field.FieldKernel(tfam_a2)


@pytest.fixture(scope="session")
def shg_v3():
    from mshg import shg
    p = params.shg_params(3.0, rhat=0.5)
    return p, shg.solve_tba(p)
