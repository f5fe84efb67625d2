#
# Fold: every switching rate pair blows up almost surely
from inc_cfg import *

test_param = TestParam(
    "Classify fold",
    [
        ExperimentParam("slow-minus",
                        "classify --kind fold --p-minus -1 --p-plus 1 "
                        "--lambda-minus 0.1 --lambda-plus 7",
                        expect={"blowup": "almost_sure", "ergodicIPMs": []}),
        ExperimentParam("slow-plus",
                        "classify --kind fold --p-minus -2 --p-plus 0.5 "
                        "--lambda-minus 9 --lambda-plus 0.2",
                        expect={"blowup": "almost_sure", "ergodicIPMs": []}),
    ]
)
