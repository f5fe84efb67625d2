from pathlib import Path

import pytest

GOLDEN_DIR = Path(__file__).parent / "golden"


def pytest_addoption(parser):
    parser.addoption("--update-golden", action="store_true", default=False,
                     help="rewrite the files under tests/golden from the current outputs")


@pytest.fixture
def golden(request):
    """check(name, text): compare text with tests/golden/<name>.

    A missing file is recorded and the test skipped, so a fresh checkout
    pins its outputs on the first run.
    """
    update = request.config.getoption("--update-golden")

    def check(name: str, text: str) -> None:
        path = GOLDEN_DIR / name
        if update or not path.exists():
            path.write_text(text, encoding="utf-8")
            if not update:
                pytest.skip(f"recorded {path.name}, compared from the next run on")
            return
        assert text == path.read_text(encoding="utf-8"), f"{name} differs from the golden copy"

    return check
