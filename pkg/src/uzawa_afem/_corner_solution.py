"""Generated by scripts/generate_corner_solution.py; do not edit."""
from numpy import cos, pi, sin  # noqa: F401

EXPONENT = 0.5444837367824641
R0 = 0.25
R1 = 0.9

def _annulus_velocity(x, y, r, phi):
    x0 = 1.54448373678246408946534984352*phi
    x1 = cos(x0)
    x2 = 0.455516263217535910534650156478*phi
    x3 = cos(x2)
    x4 = sin(x2)
    x5 = cos(0.816725605173696134198024765283*pi)
    x6 = sin(x0)
    x7 = x1 - x3 + 2.19531130005437579170617840834*x4*x5 - 0.647465542164428116768541793615*x5*x6
    x8 = x7*y
    x9 = 4*r - 1
    x10 = x9**3
    x11 = 350000*r**0.544483736782464089465349843522*x10*(10140*r + 125*x10 - 975*x9**2 - 4732)
    x12 = r**(-0.455516263217535910534650156478)*(1562500*x9**7 - 14218750*x9**6 + 44362500*x9**5 - 48059375*x9**4 + 62748517)
    x13 = 1.54448373678246408946534984352*x12
    x14 = x12*(-1.0*x1*x5 + 1.0*x3*x5 + 0.455516263217535910534650156478*x4 - 1.54448373678246408946534984352*x6)
    x15 = x*x7
    return (-1/62748517*x*x14 - 1/62748517*x11*x8 - 1/62748517*x13*x8, (1/62748517)*x11*x15 + (1/62748517)*x13*x15 - 1/62748517*x14*y,)

def _annulus_pressure(x, y, r, phi):
    x0 = 0.455516263217535910534650156478*phi
    x1 = 4*r - 1
    return (2.19531130005437579170617840834*r**(-0.455516263217535910534650156478)*(0.992084788647473805668943766094*sin(x0) + 2.17793494712985635786139937409*cos(0.816725605173696134198024765283*pi)*cos(x0))*((1562500/62748517)*x1**7 - 1093750/4826809*x1**6 + (262500/371293)*x1**5 - 21875/28561*x1**4 + 1),)

def _annulus_force(x, y, r, phi):
    x0 = r**(-1.45551626321753591053465015648)
    x1 = x*x0
    x2 = 4*r - 1
    x3 = x2**3
    x4 = x2**2
    x5 = 10140*r + 125*x3 - 975*x4 - 4732
    x6 = x3*x5
    x7 = x1*x6
    x8 = 0.455516263217535910534650156478*phi
    x9 = sin(x8)
    x10 = 0.992084788647473805668943766094*x9
    x11 = cos(x8)
    x12 = cos(0.816725605173696134198024765283*pi)
    x13 = x11*x12
    x14 = x10 + 2.17793494712985635786139937409*x13
    x15 = r**(-2.45551626321753591053465015648)
    x16 = x2**4
    x17 = x2**5
    x18 = -48059375*x16 + 44362500*x17 + 1562500*x2**7 - 14218750*x2**6 + 62748517
    x19 = x15*x18
    x20 = x*x19
    x21 = 1.0*x14
    x22 = x19*y
    x23 = 2.19531130005437579170617840834*x10*x12 - 0.992084788647473805668943766094*x11
    x24 = 1.54448373678246408946534984352*phi
    x25 = cos(x24)
    x26 = sin(x24)
    x27 = x12*x26
    x28 = -x11 + 2.19531130005437579170617840834*x12*x9 + x25 - 0.647465542164428116768541793615*x27
    x29 = x28*y
    x30 = x0*x29
    x31 = y**3
    x32 = r**(-3.45551626321753591053465015648)
    x33 = x32*x6
    x34 = x**3
    x35 = 0.455516263217535910534650156478*x9
    x36 = x12*x25
    x37 = 1.0*x13 - 1.54448373678246408946534984352*x26 + x35 - 1.0*x36
    x38 = x**2
    x39 = x29*x38
    x40 = y**2
    x41 = x*x40
    x42 = r**(-4.45551626321753591053465015648)
    x43 = x18*x42
    x44 = x31*x43
    x45 = 1.72754767574439022306486382358*x28
    x46 = 0.703537460379404361951886098002*x37
    x47 = x34*x43
    x48 = x43*y
    x49 = x38*x48
    x50 = x41*x43
    x51 = x*x11
    x52 = x*x25
    x53 = 0.911032526435071821069300312956*x9
    x54 = x53*y
    x55 = 3.08896747356492817893069968704*x26
    x56 = x12*x35
    x57 = x*x27
    x58 = x11*y
    x59 = x12*x58
    x60 = x25*y
    x61 = x12*x60
    x62 = x*x56 - 0.207495066055667459117414214955*x51 + 2.38543001318552381697881358904*x52 + x54 - x55*y - 1.54448373678246408946534984352*x57 + 2.0*x59 - 2.0*x61
    x63 = x*x62
    x64 = x33*y
    x65 = x*x53
    x66 = 0.207495066055667459117414214955*x58
    x67 = 2.38543001318552381697881358904*x60
    x68 = 2.0*x13
    x69 = 2.0*x36
    x70 = x56*y
    x71 = x27*y
    x72 = 1.54448373678246408946534984352*x71
    x73 = -x*x55 + x*x68 - x*x69 + x65 + x66 - x67 - x70 + x72
    x74 = x40*x73
    x75 = 4.63345121034739226839604953057*x48
    x76 = 19500*x4
    x77 = 3000*x3
    x78 = 1/r
    x79 = 2197*x78
    x80 = 2535*x4
    x81 = 975*x3
    x82 = 125*x16
    x83 = x15*(162240*r + x2*x79 - x76 + x77 - x78*x80 + x78*x81 - x78*x82 - 66924)
    x84 = 1081138.61574772486262574489047*x4
    x85 = x41*x83
    x86 = x37*x4
    x87 = 700000*x86
    x88 = r**(-2)
    x89 = x38*x88
    x90 = x*x88
    x91 = x67*x90
    x92 = x66*x90
    x93 = x70*x90
    x94 = x72*x90
    x95 = x37 - x53*x89 + x55*x89 - x68*x89 + x69*x89 + x91 - x92 + x93 - x94
    x96 = x38*x78
    x97 = x2*x89
    x98 = x2*x96
    x99 = -8788*r + x80 - x81 + x82 + 2197
    x100 = -x76*x96 + x77*x96 - x80*x89 + x81*x89 - x82*x89 - 26364*x96 + 2197*x97 + 40560*x98 + x99
    x101 = 540569.307873862431312872445233*x4
    x102 = x40*x78
    x103 = x40*x88
    x104 = x103*x2
    x105 = x102*x2
    x106 = -x102*x76 + x102*x77 - 26364*x102 - x103*x80 + x103*x81 - x103*x82 + 2197*x104 + 40560*x105 + x99
    x107 = 1621707.9236215872939386173357*x4
    x108 = x1*x86
    x109 = 12.3558698942597127157227987482*x26
    x110 = 0.0945173771257534190737368023309*x9
    x111 = x110*x89
    x112 = 3.64413010574028728427720125183*x9
    x113 = 3.68425786059782040921494660966*x26
    x114 = x113*x89
    x115 = 0.207495066055667459117414214955*x13
    x116 = 1.24497039633400475470448528973*x58
    x117 = x116*x90
    x118 = 8.0*x36
    x119 = 8.0*x13
    x120 = 2.38543001318552381697881358904*x36
    x121 = 14.3125800791131429018728815343*x60
    x122 = x121*x90
    x123 = 9.26690242069478453679209906113*x71
    x124 = x123*x90
    x125 = 2.73309757930521546320790093887*x9
    x126 = x*x125
    x127 = x12*x126
    x128 = x127*x88*y
    x129 = x53 - x55 + x68 - x69
    x130 = 9.26690242069478453679209906113*x26
    x131 = x*x13
    x132 = x*x36
    x133 = x34*x88
    x134 = x103*x110
    x135 = x103*x113
    x136 = x125*y
    x137 = x12*x89
    x138 = x4*x96
    x139 = 121680*x4
    x140 = 9000*x16
    x141 = r**(-3)
    x142 = x141*x38
    x143 = x142*x4
    x144 = 2925*x16
    x145 = 375*x17
    x146 = 7605*x3
    x147 = 58500*x3
    x148 = x3*x96
    x149 = 19500*x3
    x150 = 3000*x16
    x151 = 40560*x4
    x152 = 2535*x3
    x153 = 125*x17
    x154 = 975*x16
    x155 = -105456*r - x149 + x150 + x151 - x152*x78 - x153*x78 + x154*x78 + x4*x79 + 26364
    x156 = r**(-0.455516263217535910534650156478)*x2
    x157 = x156*x29
    x158 = x102*x4
    x159 = x141*x40
    x160 = x159*x4
    x161 = x102*x3
    x162 = 1050000*x
    x163 = -x103*x53 + x103*x55 - x103*x68 + x103*x69 + x37 - x91 + x92 - x93 + x94
    x164 = x1*x28
    x165 = x31*x88
    x166 = x156*x28
    return ((1/62748517)*x100*x101*x30 + (350000/62748517)*x100*x108 + (1/62748517)*x106*x107*x30 + (1050000/62748517)*x106*x108 + 0.0122450536164708327225831081063*x14*x7 + (1050000/62748517)*x157*(-70304*x102 + x103*x149 - x103*x150 - x103*x151 + 26364*x104 + 162240*x105 + x152*x159 + x153*x159 - x154*x159 + x155 - 104000*x158 - 2197*x160 + 20000*x161) + (350000/62748517)*x157*(-312000*x138 - x139*x89 - x140*x89 - x142*x144 + x142*x145 + x142*x146 - 6591*x143 + x147*x89 + 60000*x148 + x155 - 210912*x96 + 79092*x97 + 486720*x98) - 1/62748517*x19*(-x*x130 + x*x134 - x*x135 + 0.207495066055667459117414214955*x103*x131 - 2.38543001318552381697881358904*x103*x132 + x109*x133 - x112*x133 - x116*x89 + x118*x133 - x119*x133 - x12*x54 + x121*x89 - x123*x89 + x126 + 6.0*x131 - 6.0*x132 + x136*x137 + 0.414990132111334918234828429909*x58 - 4.77086002637104763395762717808*x60 + 3.08896747356492817893069968704*x71) - 1/62748517*x20*x21 + 0.0000000984554734119032065389114992803*x20*x37 + 0.0000000492277367059516032694557496402*x20*x95 - 1/62748517*x20*(x103*x109 - x103*x112 + x103*x118 - x103*x119 + x111 - x114 + x115*x89 + x117 - x120*x89 - x122 + x124 - x128 + x129) + (1/62748517)*x22*x23 - 0.0000000448480693419036094161005333721*x22*x28 - 0.0117726182022496974717263900102*x28*x31*x33 + 0.0344594156941661222886190247481*x30*x6 + 0.0172297078470830611443095123741*x33*x34*x37 + 0.017229707847083061144309512374*x33*x37*x41 - 0.0117726182022496974717263900102*x33*x39 + (350000/62748517)*x33*x74 + (1/62748517)*x39*x83*x84 + 0.0000000246138683529758016347278748201*x43*x74 + (1/62748517)*x44*x45 + (1/62748517)*x45*x49 - 1/62748517*x46*x47 - 1/62748517*x46*x50 - 1050000/62748517*x63*x64 - 1/62748517*x63*x75 + (700000/62748517)*x7*x95 - 1/62748517*x85*x87, 0.0000000448480693419036094161005333721*x*x15*x18*x28 - 350000/62748517*x*x166*(-210912*x102 - x103*x139 - x103*x140 + x103*x147 + 79092*x104 + 486720*x105 - x144*x159 + x145*x159 + x146*x159 + x155 - 312000*x158 - 6591*x160 + 60000*x161) + 0.0117726182022496974717263900102*x*x28*x3*x32*x40*x5 - 1/62748517*x*x73*x75 + (1050000/62748517)*x0*x100*x37*x4*y + (350000/62748517)*x0*x106*x37*x4*y + 0.0122450536164708327225831081063*x0*x14*x3*x5*y + (700000/62748517)*x0*x163*x3*x5*y - 1/62748517*x100*x107*x164 - 1/62748517*x101*x106*x164 + 0.0000000492277367059516032694557496402*x15*x163*x18*y + 0.0000000984554734119032065389114992803*x15*x18*x37*y - 1/62748517*x162*x166*(-104000*x138 + x142*x152 + x142*x153 - x142*x154 - 2197*x143 + 20000*x148 + x149*x89 - x150*x89 - x151*x89 + x155 - 70304*x96 + 26364*x97 + 162240*x98) - 1/62748517*x162*x64*x73 + 0.0000000246138683529758016347278748201*x18*x38*x42*x62 - 1/62748517*x19*(-x103*x127 + 1.24497039633400475470448528973*x103*x51 - 14.3125800791131429018728815343*x103*x52 + 9.26690242069478453679209906113*x103*x57 + x109*x165 + x111*y - x112*x165 - x114*y + x118*x165 - x119*x165 + x12*x65 - x130*y + x136 + x137*x66 - 0.414990132111334918234828429909*x51 + 4.77086002637104763395762717808*x52 - 3.08896747356492817893069968704*x57 + 6.0*x59 - 2.38543001318552381697881358904*x61*x89 - 6.0*x61) - 1/62748517*x20*x23 - 1/62748517*x21*x22 - 1/62748517*x22*(x103*x115 - x103*x120 + x109*x89 - x112*x89 - x117 + x118*x89 - x119*x89 + x122 - x124 + x128 + x129 + x134 - x135) + 0.0117726182022496974717263900102*x28*x3*x32*x34*x5 - 0.0344594156941661222886190247481*x28*x7 - 1/62748517*x28*x84*x85 + 0.0172297078470830611443095123741*x3*x31*x32*x37*x5 + 0.017229707847083061144309512374*x3*x32*x37*x38*x5*y + (350000/62748517)*x3*x32*x38*x5*x62 - 1/62748517*x38*x83*x87*y - 1/62748517*x44*x46 - 1/62748517*x45*x47 - 1/62748517*x45*x50 - 1/62748517*x46*x49,)

def _inner_velocity(x, y, r, phi):
    x0 = r**(-0.455516263217535910534650156478)
    x1 = 1.54448373678246408946534984352*phi
    x2 = cos(x1)
    x3 = 0.455516263217535910534650156478*phi
    x4 = cos(x3)
    x5 = sin(x3)
    x6 = cos(0.816725605173696134198024765283*pi)
    x7 = sin(x1)
    x8 = 1.54448373678246408946534984352*x2 - 1.54448373678246408946534984352*x4 + 3.39062260010875158341235681667*x5*x6 - 1.0*x6*x7
    x9 = -1.0*x2*x6 + 1.0*x4*x6 + 0.455516263217535910534650156478*x5 - 1.54448373678246408946534984352*x7
    return (-x0*(x*x9 + x8*y), x0*(x*x8 - x9*y),)

def _inner_pressure(x, y, r, phi):
    x0 = 0.455516263217535910534650156478*phi
    return (2.19531130005437579170617840834*r**(-0.455516263217535910534650156478)*(0.992084788647473805668943766094*sin(x0) + 2.17793494712985635786139937409*cos(0.816725605173696134198024765283*pi)*cos(x0)),)
