#
# Rosenzweig-MacArthur: trace at the coexistence equilibrium vanishes at p = 2
import inc_const as const
from inc_cfg import *

test_param = TestParam(
    "Rosenzweig-MacArthur Hopf scan",
    [
        ExperimentParam("rm",
                        "app --model rm --scan --scan-lo 0.6 --scan-hi 10 --scan-points 400 "
                        "--out rm_scan.csv",
                        expect={"hopfPoint": (const.RM_HOPF_LO, const.RM_HOPF_HI),
                                "signChanges": lambda v: len(v) == 1})
    ]
)
