#
# Supercritical pitchfork with l+/p+ < -l-/p-: three ergodic invariant measures
from inc_cfg import *

test_param = TestParam(
    "Classify pitchfork, super regime",
    [
        ExperimentParam("classify",
                        "classify --kind sup-pitchfork --p-minus -1 --p-plus 1 "
                        "--lambda-minus 2 --lambda-plus 1",
                        expect={"comparison": "super",
                                "ergodicIPMs": lambda v: len(v) == 3,
                                "growthRate": 1.0 / 3.0})
    ]
)
