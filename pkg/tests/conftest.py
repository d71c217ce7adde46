import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from pelab.demo import build_demo_project


@pytest.fixture(scope="session")
def demo_store(tmp_path_factory):
    root = tmp_path_factory.mktemp("demo-store")
    return build_demo_project(root)
