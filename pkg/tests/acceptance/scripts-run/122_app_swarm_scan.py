#
# Swarming: pitchfork threshold 2 d0 sqrt(2q/w3) = 2 for q=1, w3=2, d0=1
from inc_cfg import *

test_param = TestParam(
    "Swarm threshold scan",
    [
        ExperimentParam("swarm",
                        "app --model swarm --scan --q 1 --w3 2 --d0 1 --scan-points 50 "
                        "--out swarm_scan.csv",
                        expect={"threshold": 2.0, "rows": 50})
    ]
)
