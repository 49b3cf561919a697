import pytest
from hypothesis import HealthCheck, settings

from fbindex.surface_zoo import SurfaceSpec

settings.register_profile(
    "fbindex", max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("fbindex")

CATENOID = SurfaceSpec.catenoid(1)
FS21 = SurfaceSpec.fraser_sargent(2, 1)
FS31 = SurfaceSpec.fraser_sargent(3, 1)
MOBIUS = SurfaceSpec.mobius()

ALL_SURFACES = [CATENOID, SurfaceSpec.catenoid(2), FS21, FS31, SurfaceSpec.fraser_sargent(3, 2), MOBIUS]


@pytest.fixture(params=ALL_SURFACES, ids=lambda s: s.label())
def surface(request):
    return request.param
