"""Embedded high-precision reference values used for self-grading.

``TABLE1`` holds log E^(c,2)(0;(0,r)) for integer r = 4..14 and c in {0, 1},
together with the per-r tail coefficient a_1 column, from an independent
20-digit spectral computation of the same determinants.  ``A1_EXTRAPOLATED``
is the corresponding extrapolated row; the predicted limit is
9 * 2^(-11/3) = 0.70870559... in magnitude (see asymptotics.A1_PREDICTED).
"""

# r -> (logE, a1) per c
TABLE1 = {
    0: {
        4: (-5.96549338586, -0.70729888196),
        5: (-7.7702165574578, -0.707506362179),
        6: (-9.666703768133, -0.707671636400),
        7: (-11.6460744648319, -0.707802917979),
        8: (-13.701343595761, -0.707908414200),
        9: (-15.826846765594, -0.70799443184),
        10: (-18.017880484821, -0.70806558203),
        11: (-20.27046470121, -0.7081252605),
        12: (-22.58117923782, -0.7081762248),
        13: (-24.9470471656, -0.7082218856),
        14: (-27.3654492473, -0.70827084),
    },
    1: {
        4: (-3.2910182568186667, -0.7050253349947),
        5: (-4.6175115857278, -0.7059621770238),
        6: (-6.06617567204249, -0.7065523127608),
        7: (-7.6216467824166, -0.706953478338),
        8: (-9.2725398209570, -0.707241379027),
        9: (-11.010033902389, -0.70745656369),
        10: (-12.8270650595890, -0.7076225663),
        11: (-14.7178300927, -0.7077538862),
        12: (-16.6774638565, -0.7078597927),
        13: (-18.70181973197, -0.7079460684),
        14: (-20.7873147490, -0.7080153465),
    },
}

A1_EXTRAPOLATED = {0: -0.7088, 1: -0.7083172}


def table1_logE(c: int, r: int) -> float:
    return TABLE1[c][r][0]


def table1_a1(c: int, r: int) -> float:
    return TABLE1[c][r][1]
