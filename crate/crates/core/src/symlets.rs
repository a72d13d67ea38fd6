//! Least-asymmetric Daubechies (symlet) lowpass filters, `sum = sqrt(2)`.
//!
//! Entry `N - 1` has `2N` taps and `N` vanishing moments. The tables were
//! regenerated in 60-digit arithmetic by `tools/gen_symlets.py`; the common
//! published tables are only accurate to about 1e-12.

#![allow(clippy::excessive_precision, clippy::unreadable_literal)]

pub(crate) const SYMLETS: [&[f64]; 10] = [
    // N = 1 (Haar)
    &[0.70710678118654752440, 0.70710678118654752440],
    // N = 2
    &[
        -0.12940952255126038117,
        0.22414386804201338103,
        0.83651630373780790558,
        0.48296291314453414337,
    ],
    // N = 3
    &[
        0.035226291885709536603,
        -0.085441273882026661693,
        -0.1350110200102545887,
        0.4598775021184915701,
        0.80689150931109257649,
        0.332670552950082616,
    ],
    // N = 4
    &[
        -0.075765714789502213228,
        -0.029635527646002491764,
        0.49761866763277498998,
        0.80373875180513208088,
        0.2978577956053060514,
        -0.099219543576633532585,
        -0.012603967262031303754,
        0.032223100604051467872,
    ],
    // N = 5
    &[
        0.027333068344998768818,
        0.02951949092570626125,
        -0.039134249302313843624,
        0.1993975339768555969,
        0.72340769040404079207,
        0.63397896345679206372,
        0.016602105764510848133,
        -0.17532808990805622424,
        -0.021101834024689041001,
        0.019538882735249826776,
    ],
    // N = 6
    &[
        0.015404109327044824299,
        0.0034907120842221625153,
        -0.1179901111485200254,
        -0.048311742585698054971,
        0.49105594192797373304,
        0.78764114102865099607,
        0.33792942172816583271,
        -0.072637522786376583464,
        -0.021060292512370847992,
        0.044724901770781384663,
        0.001767711864254007741,
        -0.0078007083250323804142,
    ],
    // N = 7
    &[
        0.0026818145682601470291,
        -0.0010473848886797380865,
        -0.012636303403240566583,
        0.030515513165877885745,
        0.067892693501220564905,
        -0.049552834937042832301,
        0.017441255086835706851,
        0.53610191709056923066,
        0.76776431700488293117,
        0.2886296317506478747,
        -0.14004724044293365414,
        -0.10780823770328971255,
        0.0040102448715223951678,
        0.010268176708464816231,
    ],
    // N = 8
    &[
        -0.0033824159510050025955,
        -0.00054213233180001068935,
        0.031695087811525991431,
        0.0076074873249766081919,
        -0.14329423835127266284,
        -0.061273359067811077843,
        0.48135965125905339159,
        0.77718575169962802862,
        0.36444189483617893676,
        -0.051945838107881800736,
        -0.027219029917103486322,
        0.049137179673730286787,
        0.0038087520138944894631,
        -0.014952258337062199118,
        -0.00030292051472413308126,
        0.0018899503327676891843,
    ],
    // N = 9
    &[
        0.0014009155259146562313,
        0.00061978088898550708094,
        -0.013271967781817133806,
        -0.011528210207679186143,
        0.030224878858275188135,
        0.00058346274612498183102,
        -0.054568958430833351097,
        0.23876091460730516626,
        0.71789708276441240466,
        0.61733844914093415132,
        0.035272488035271042689,
        -0.19155083129728433495,
        -0.01823377077939550557,
        0.06207778930288574757,
        0.0088592674934002666972,
        -0.010264064027633120485,
        -0.00047315449868004354219,
        0.0010694900329086119159,
    ],
    // N = 10
    &[
        0.00077015980911445982258,
        0.000095632670722852730785,
        -0.008641299277022150261,
        -0.0014653825813046105136,
        0.045927239231091508585,
        0.011609893903711318064,
        -0.15949427888491060946,
        -0.070880535783231572286,
        0.47169066693844291,
        0.76951003702109793678,
        0.38382676106707632626,
        -0.035536740473819585816,
        -0.031990056882428113921,
        0.049994972077375156277,
        0.005764912033581149672,
        -0.020354939812311110745,
        -0.00080435893201645129606,
        0.0045931735853117919475,
        0.000057036083618495006815,
        -0.00045932942100465204019,
    ],
];
