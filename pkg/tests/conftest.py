import os

import pytest
from hypothesis import settings

from uavudn import _backend

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(params=_backend.available())
def backend(request):
    """Run a test once per available kernel backend."""
    previous = _backend.BACKEND
    _backend.use(request.param)
    yield request.param
    _backend.use(previous)
