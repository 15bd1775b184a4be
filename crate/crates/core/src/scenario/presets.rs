//! Built-in scenario documents. Traffic magnitudes are synthetic: the
//! published setups only fix capacities and SLAs.

pub const UC1_DEFAULT: &str = r#"# Inter-slice bandwidth negotiation (eMBB vs URLLC).
scenario = "uc1"

[capacity]
b_total_mhz = 50.0
b_max_mhz = 50.0
f_max_ghz = 45.0
eta_min_bits_per_hz = 6.0
eta_max_bits_per_hz = 8.0
cycles_per_bit = 100.0

[[slices]]
id = "embb"
sla_latency_ms = 50.0
traffic_rate_mbps = 100.0
queue_backlog_mb = 2.0

[[slices]]
id = "urllc"
sla_latency_ms = 10.0
traffic_rate_mbps = 50.0
queue_backlog_mb = 0.1

[weights]
w = [0.3, 0.2, 0.2, 0.3]
epsilon = 0.05
r_max = 0.2

[twin]
perturbation_sigma = 0.1
horizon = 64

[protocol]
max_rounds = 8
accept_threshold = 0.6
concession_rate = 0.25
status_quo_fraction = 0.75
anchoring_gamma = 2.0

[memory]
alpha = 1.0
beta = 0.5
delta = 1.0
theta = 5.0
vanilla_theta = 1.0
kappa = 0.5
sigma_fraction = 0.1
top_n = 5
decay_form = "factor"
"#;

pub const UC2_DEFAULT: &str = r#"# Cross-domain RAN (bandwidth) vs edge (CPU) negotiation.
scenario = "uc2"

[capacity]
b_total_mhz = 40.0
b_max_mhz = 40.0
f_max_ghz = 45.0
eta_min_bits_per_hz = 6.0
eta_max_bits_per_hz = 8.0
cycles_per_bit = 100.0

[[slices]]
id = "ran"
sla_latency_ms = 10.0
traffic_rate_mbps = 60.0
queue_backlog_mb = 0.1

[[slices]]
id = "edge"
sla_latency_ms = 10.0
traffic_rate_mbps = 60.0
queue_backlog_mb = 0.1

[weights]
w = [0.3, 0.4, 0.1, 0.2]
epsilon = 0.05
r_max = 0.2

[twin]
perturbation_sigma = 0.1
horizon = 64

[protocol]
max_rounds = 8
accept_threshold = 0.6
concession_rate = 0.25
status_quo_fraction = 0.75
anchoring_gamma = 2.0

[memory]
alpha = 1.0
beta = 0.5
delta = 1.0
theta = 5.0
vanilla_theta = 1.0
kappa = 0.5
sigma_fraction = 0.1
top_n = 5
decay_form = "factor"
"#;
