//! Published pool results for five datasets. Member order in every row is
//! rotation, geometric, PABIDOT, SEAL; classifier order is MLP, IBK, SVM,
//! naive Bayes, J48.

pub const DATASETS: [&str; 5] = ["LRDS", "PBDS", "SSDS", "WCDS", "WQDS"];
pub const MEMBERS: [&str; 4] = ["RP", "GP", "PABIDOT", "SEAL"];
pub const CLASSIFIERS: [&str; 5] = ["MLP", "IBK", "SVM", "NaiveBayes", "J48"];

/// Classification accuracy, `[dataset][member][classifier]`.
pub const ACCURACY: [[[f64; 5]; 4]; 5] = [
    [
        [0.7404, 0.8719, 0.7107, 0.4841, 0.6489],
        [0.7912, 0.9305, 0.7792, 0.5989, 0.7054],
        [0.7822, 0.9224, 0.7848, 0.6280, 0.7262],
        [0.8059, 0.9367, 0.8171, 0.6310, 0.8528],
    ],
    [
        [0.9200, 0.9552, 0.8999, 0.3576, 0.9561],
        [0.9024, 0.9567, 0.8993, 0.4310, 0.9549],
        [0.9583, 0.9476, 0.9209, 0.8968, 0.9492],
        [0.9634, 0.9673, 0.9559, 0.8697, 0.9634],
    ],
    [
        [0.9626, 0.9980, 0.8821, 0.6904, 0.9951],
        [0.9873, 0.9981, 0.7841, 0.7918, 0.9959],
        [0.9865, 0.9867, 0.9280, 0.9134, 0.9874],
        [0.9970, 0.9921, 0.9851, 0.8994, 0.9987],
    ],
    [
        [0.8909, 0.8500, 0.8227, 0.8455, 0.8682],
        [0.9182, 0.8659, 0.8500, 0.8432, 0.8886],
        [0.9045, 0.8545, 0.8841, 0.8886, 0.8841],
        [0.8932, 0.8682, 0.8909, 0.8841, 0.8659],
    ],
    [
        [0.4765, 0.5329, 0.4488, 0.3232, 0.4553],
        [0.4886, 0.5688, 0.4488, 0.3216, 0.4643],
        [0.5412, 0.6182, 0.5147, 0.4657, 0.4916],
        [0.5392, 0.6402, 0.5202, 0.4783, 0.8415],
    ],
];

/// Minimum privacy guarantee per member.
pub const PRIVACY_MIN: [[f64; 4]; 5] = [
    [1.0160, 1.0169, 1.0179, 1.0157],
    [0.9988, 1.0009, 0.9927, 0.9974],
    [0.9991, 0.9999, 0.9920, 0.9961],
    [1.0078, 1.0078, 1.0104, 1.0072],
    [1.0268, 1.0267, 1.0225, 1.0255],
];

/// Published scaled minimum privacy guarantee.
pub const PRIVACY_SCALED: [[f64; 4]; 5] = [
    [0.9981, 0.9990, 1.0000, 0.9978],
    [0.9979, 1.0000, 0.9838, 0.9965],
    [0.9992, 1.0000, 0.9921, 0.9962],
    [0.9974, 0.9974, 1.0000, 0.9968],
    [1.0000, 0.9999, 0.9958, 0.9958],
];

/// `√Var(P)_min` per member (minimum over naive, ICA and known-I/O attacks).
pub const RESISTANCE_STD: [[f64; 4]; 5] = [
    [0.0945, 0.0584, 0.6982, 0.6986],
    [0.0001, 0.0000, 0.6755, 0.6932],
    [0.0021, 0.0011, 0.7031, 0.7027],
    [0.0000, 0.0000, 0.6512, 0.6557],
    [0.0057, 0.0039, 0.6901, 0.6859],
];

/// Published scaled `√Var(P)_min`.
pub const RESISTANCE_SCALED: [[f64; 4]; 5] = [
    [0.1353, 0.0836, 0.9994, 1.0000],
    [1.4426e-4, 0.0000, 0.9745, 1.0000],
    [0.0030, 0.0016, 1.0000, 0.9994],
    [0.0000, 0.0000, 0.9931, 1.0000],
    [0.0083, 0.0057, 1.0000, 0.9939],
];

/// Published fuzzy index, `[dataset][member][classifier]`.
pub const FUZZY_INDEX: [[[f64; 5]; 4]; 5] = [
    [
        [0.2744, 0.2722, 0.2744, 0.2523, 0.2744],
        [0.2023, 0.2005, 0.2023, 0.2023, 0.2023],
        [0.8104, 0.8471, 0.8115, 0.8390, 0.8068],
        [0.8190, 0.8479, 0.8230, 0.8378, 0.8338],
    ],
    [
        [0.1496; 5],
        [0.1495; 5],
        [0.8407, 0.8402, 0.8378, 0.8343, 0.8403],
        [0.8490, 0.8491, 0.8487, 0.8375, 0.8490],
    ],
    [
        [0.1505; 5],
        [0.1500; 5],
        [0.8479, 0.8479, 0.8453, 0.8437, 0.8479],
        [0.8495, 0.8493, 0.8492, 0.8431, 0.8501],
    ],
    [
        [0.1495; 5],
        [0.1495; 5],
        [0.8428, 0.8325, 0.8393, 0.8402, 0.8393],
        [0.8422, 0.8372, 0.8418, 0.8406, 0.8367],
    ],
    [
        [0.1522, 0.1523, 0.1522, 0.1522, 0.1522],
        [0.1513, 0.1514, 0.1513, 0.1513, 0.1513],
        [0.8486, 0.8398, 0.8491, 0.8368, 0.8477],
        [0.8480, 0.8342, 0.8485, 0.8426, 0.8292],
    ],
];

/// Index of the highlighted winner per `[dataset][classifier]`.
pub const WINNER: [[usize; 5]; 5] = [
    [3, 3, 3, 2, 3],
    [3, 3, 3, 3, 3],
    [3, 3, 3, 2, 3],
    [2, 3, 3, 3, 2],
    [2, 2, 2, 3, 2],
];
