"""Frozen reference values; regenerate with scripts/make_oracles.py."""

DAWSON = {0.001: 0.0009999993333336, 0.1: 0.09933599239785286, 0.5: 0.4244363835020223, 1.0: 0.5380795069127684, 2.0: 0.30134038892379195, 3.9: 0.13292729108108928, 4.1: 0.12596465843434615, 6.0: 0.08454268897454385, 10.0: 0.05025384718759853, 30.0: 0.016675941401059175}

DAWSON_MAX = (0.9241388730045917, 0.5410442246351816)

KUMMER = {-0.1: 0.971428195113532, -1.0: 0.7675909659809546, -5.0: 0.3944527702657692, -20.0: 0.16146527455677318, -45.0: 0.09232342285255793, -100.0: 0.052819468371410154}

GAUSS = {0.1: 1.021646810699388, 0.1353352832366127: 1.0297804826419545, 0.45: 1.1174227931534702, 0.5: 1.1347763412625334, 0.55: 1.1534653156522308, 0.8: 1.2784610932126064, 0.95: 1.4146698004635123, 0.999: 1.5092760671668177, 1.0: 1.5140716549775535}

GAMMA = {0.1: 9.51350769866873, 0.5: 1.772453850905516, 1.7071067811865475: 0.9100046244286003, 2.414213562373095: 1.2538154806428916, 3.7: 4.170651783796604, 12.5: 136843365.46556586}

DIGAMMA = {0.1: -10.423754940411076, 0.5: -1.9635100260214235, 1.7071067811865475: 0.21417000487739626, 3.7: 1.1671535393615113, 12.5: 2.4851956512749123}

CONSTANTS = {'C0': 1.3780588342159001, 'C1': 0.6604707225793917, 'C2': 0.7257883145309364, 'C3': 0.1382950422552914}

NSTATIC = {'zero': 1.8482777460091835, 'argmin': 3.003950536537223, 'min': -0.28474943965684646, 'at': {0.5: 0.8800804182185509, 1.0: 0.5755636164979777, 2.0: -0.07615901382553684, 5.0: -0.1154186108371774, 8.0: -0.03478400988804092, 20.0: -0.005076943751970561}}

K0 = {0.001: 0.9929501746969189, 0.01: 0.952301788950968, 0.1: 0.7403709648782837, 0.5: 0.3554078801919038, 1.0: 0.1653533815925724, 2.0: 0.03918686562740106, 5.0: 0.0005609600364552543}

