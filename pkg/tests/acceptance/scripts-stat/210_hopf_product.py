#
# Hopf lift: uniform angle times the pitchfork radial law
import inc_const as const
from inc_cfg import *

test_param = TestParam(
    "Hopf product measure",
    [
        ExperimentParam("hopf",
                        "hopf --kind sup-hopf-radial --p-minus -1 --p-plus 1 "
                        "--lambda-minus 2 --lambda-plus 1 --r0 0.5 --horizon 100200 "
                        "--sample-dt 1 --bins 50 --seed 3",
                        expect={"status": "horizon_reached",
                                "samples": lambda n: n >= 100000,
                                "ksAngle": (0.0, const.KS_MAX),
                                "l1Radial": (0.0, const.L1_MAX)})
    ]
)
