#
# Analytic pitchfork density on a 1000 point grid, mode masses (1/3, 2/3)
from inc_cfg import *

test_param = TestParam(
    "Pitchfork density table",
    [
        ExperimentParam("density",
                        "density --kind sup-pitchfork --p-minus -1 --p-plus 1 "
                        "--lambda-minus 2 --lambda-plus 1 --grid 1000 --out rho.csv",
                        expect={"rows": 1000,
                                "support": [0.0, 1.0],
                                "masses.0": (1.0 / 3.0 - 1e-8, 1.0 / 3.0 + 1e-8),
                                "masses.1": (2.0 / 3.0 - 1e-8, 2.0 / 3.0 + 1e-8)})
    ]
)
