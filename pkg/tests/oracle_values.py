"""Reference values frozen from scipy.stats and scikit-posthocs (posthoc_conover).

Regenerate only if a dataset changes; the tests compare against these
constants, not against the live libraries.
"""

STATS_DATASETS = {'hollander_wolfe': {'data': {'A': [2.9, 3.0, 2.5, 2.6, 3.2],
                              'B': [3.8, 2.7, 4.0, 2.4],
                              'C': [2.8, 3.4, 3.7, 2.2, 2.0]},
                     'kw': (0.7714285714285722, 0.6799647735788936),
                     'levene': (4.781469208069268, 0.032039911416238256),
                     'anova': (0.56007326007326, 0.5866329910417377),
                     'ttest': (-1.0192387297859435, 0.34201665526472036),
                     'conover': {('A', 'B'): (0.5553068125522818, 1.0),
                                 ('A', 'C'): (0.8336365995136947, 1.0),
                                 ('B', 'C'): (0.43448676177222045, 1.0)}},
 'integer_ties': {'data': {'A': [1, 2, 2, 3, 3, 3, 4],
                           'B': [2, 3, 4, 4, 5, 5, 6, 6],
                           'C': [5, 6, 6, 7, 7, 8]},
                  'kw': (13.298456409770282, 0.0012950212109081214),
                  'levene': (0.7197676562788122, 0.5003566000938179),
                  'anova': (17.88683274021352, 5.276254985344199e-05),
                  'ttest': (-2.83886085661715, 0.013951683168452123),
                  'conover': {('A', 'B'): (0.007404261264306956, 0.00859978740128351),
                              ('A', 'C'): (1.183252985653261e-05, 3.549758956959783e-05),
                              ('B', 'C'): (0.004299893700641755, 0.00859978740128351)}},
 'rounded_normal': {'data': {'A': [2.0,
                                   -2.6,
                                   0.4,
                                   -0.6,
                                   -0.5,
                                   -0.2,
                                   -2.0,
                                   -0.2,
                                   -0.9,
                                   3.3,
                                   0.2,
                                   -0.4],
                             'B': [0.5, 0.1, -0.3, 0.4, 1.3, 0.6, 1.8, 0.6, 0.8, 2.3],
                             'C': [2.6, 0.5, 1.1, 2.6, 5.4, 1.0, 1.0, 3.5, -0.3, 0.9, 3.3]},
                    'kw': (11.464808729868972, 0.0032392794530821225),
                    'levene': (2.1655448053265896, 0.13228329667039715),
                    'anova': (6.202438861614625, 0.005566492038664813),
                    'ttest': (-1.7038379579765468, 0.10390028939405614),
                    'conover': {('A', 'B'): (0.03447331018668232, 0.06894662037336464),
                                ('A', 'C'): (0.00030880260313271543, 0.0009264078093981463),
                                ('B', 'C'): (0.09497203886692734, 0.09497203886692734)}}}
