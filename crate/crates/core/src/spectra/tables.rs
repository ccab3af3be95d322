//! Tabulated colorimetric reference data on the 380–720 nm / 5 nm grid.

/// CIE 1931 2° standard observer colour matching functions `[x̄, ȳ, z̄]`.
pub const CIE1931_CMF: [[f64; 3]; 69] = [
    [0.001368, 0.000039, 0.006450], // 380
    [0.002236, 0.000064, 0.010550], // 385
    [0.004243, 0.000120, 0.020050], // 390
    [0.007650, 0.000217, 0.036210], // 395
    [0.014310, 0.000396, 0.067850], // 400
    [0.023190, 0.000640, 0.110200], // 405
    [0.043510, 0.001210, 0.207400], // 410
    [0.077630, 0.002180, 0.371300], // 415
    [0.134380, 0.004000, 0.645600], // 420
    [0.214770, 0.007300, 1.039050], // 425
    [0.283900, 0.011600, 1.385600], // 430
    [0.328500, 0.016840, 1.622960], // 435
    [0.348280, 0.023000, 1.747060], // 440
    [0.348060, 0.029800, 1.782600], // 445
    [0.336200, 0.038000, 1.772110], // 450
    [0.318700, 0.048000, 1.744100], // 455
    [0.290800, 0.060000, 1.669200], // 460
    [0.251100, 0.073900, 1.528100], // 465
    [0.195360, 0.090980, 1.287640], // 470
    [0.142100, 0.112600, 1.041900], // 475
    [0.095640, 0.139020, 0.812950], // 480
    [0.057950, 0.169300, 0.616200], // 485
    [0.032010, 0.208020, 0.465180], // 490
    [0.014700, 0.258600, 0.353300], // 495
    [0.004900, 0.323000, 0.272000], // 500
    [0.002400, 0.407300, 0.212300], // 505
    [0.009300, 0.503000, 0.158200], // 510
    [0.029100, 0.608200, 0.111700], // 515
    [0.063270, 0.710000, 0.078250], // 520
    [0.109600, 0.793200, 0.057250], // 525
    [0.165500, 0.862000, 0.042160], // 530
    [0.225750, 0.914850, 0.029840], // 535
    [0.290400, 0.954000, 0.020300], // 540
    [0.359700, 0.980300, 0.013400], // 545
    [0.433450, 0.994950, 0.008750], // 550
    [0.512050, 1.000000, 0.005750], // 555
    [0.594500, 0.995000, 0.003900], // 560
    [0.678400, 0.978600, 0.002750], // 565
    [0.762100, 0.952000, 0.002100], // 570
    [0.842500, 0.915400, 0.001800], // 575
    [0.916300, 0.870000, 0.001650], // 580
    [0.978600, 0.816300, 0.001400], // 585
    [1.026300, 0.757000, 0.001100], // 590
    [1.056700, 0.694900, 0.001000], // 595
    [1.062200, 0.631000, 0.000800], // 600
    [1.045600, 0.566800, 0.000600], // 605
    [1.002600, 0.503000, 0.000340], // 610
    [0.938400, 0.441200, 0.000240], // 615
    [0.854450, 0.381000, 0.000190], // 620
    [0.751400, 0.321000, 0.000100], // 625
    [0.642400, 0.265000, 0.000050], // 630
    [0.541900, 0.217000, 0.000030], // 635
    [0.447900, 0.175000, 0.000020], // 640
    [0.360800, 0.138200, 0.000010], // 645
    [0.283500, 0.107000, 0.000000], // 650
    [0.218700, 0.081600, 0.000000], // 655
    [0.164900, 0.061000, 0.000000], // 660
    [0.121200, 0.044580, 0.000000], // 665
    [0.087400, 0.032000, 0.000000], // 670
    [0.063600, 0.023200, 0.000000], // 675
    [0.046770, 0.017000, 0.000000], // 680
    [0.032900, 0.011920, 0.000000], // 685
    [0.022700, 0.008210, 0.000000], // 690
    [0.015840, 0.005723, 0.000000], // 695
    [0.011359, 0.004102, 0.000000], // 700
    [0.008111, 0.002929, 0.000000], // 705
    [0.005790, 0.002091, 0.000000], // 710
    [0.004109, 0.001484, 0.000000], // 715
    [0.002899, 0.001047, 0.000000], // 720
];

/// ColorChecker "Red" patch reflectance (BabelColor average, 10 nm data
/// linearly refined to 5 nm).
pub const COLORCHECKER_RED: [f64; 69] = [
    0.0500, 0.0495, 0.0490, 0.0485, 0.0480, 0.0474, 0.0470, 0.0469, 0.0470, 0.0470, 0.0470, 0.0470,
    0.0470, 0.0471, 0.0470, 0.0466, 0.0460, 0.0455, 0.0450, 0.0444, 0.0440, 0.0439, 0.0440, 0.0444,
    0.0450, 0.0455, 0.0460, 0.0465, 0.0470, 0.0475, 0.0480, 0.0485, 0.0490, 0.0493, 0.0500, 0.0517,
    0.0540, 0.0567, 0.0600, 0.0646, 0.0720, 0.0842, 0.1040, 0.1339, 0.1780, 0.2390, 0.3120, 0.3911,
    0.4670, 0.5307, 0.5810, 0.6180, 0.6440, 0.6624, 0.6750, 0.6838, 0.6900, 0.6943, 0.6980, 0.7018,
    0.7060, 0.7104, 0.7150, 0.7197, 0.7240, 0.7274, 0.7300, 0.7321, 0.7340,
];

/// ColorChecker "Green" patch reflectance (BabelColor average, 10 nm data
/// linearly refined to 5 nm).
pub const COLORCHECKER_GREEN: [f64; 69] = [
    0.0520, 0.0525, 0.0530, 0.0535, 0.0540, 0.0544, 0.0550, 0.0559, 0.0570, 0.0580, 0.0590, 0.0598,
    0.0610, 0.0631, 0.0660, 0.0697, 0.0750, 0.0826, 0.0930, 0.1067, 0.1250, 0.1489, 0.1780, 0.2113,
    0.2460, 0.2791, 0.3070, 0.3265, 0.3370, 0.3385, 0.3340, 0.3266, 0.3170, 0.3059, 0.2930, 0.2780,
    0.2620, 0.2460, 0.2300, 0.2141, 0.1980, 0.1815, 0.1650, 0.1491, 0.1350, 0.1237, 0.1150, 0.1086,
    0.1040, 0.1006, 0.0980, 0.0958, 0.0940, 0.0927, 0.0920, 0.0921, 0.0930, 0.0947, 0.0970, 0.0994,
    0.1020, 0.1050, 0.1080, 0.1108, 0.1130, 0.1144, 0.1150, 0.1146, 0.1140,
];
