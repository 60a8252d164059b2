//! Built-in configurations. Plain names use the full-size grids and run
//! lengths; `*-quick` variants shrink them to finish in seconds.

pub const NAMES: &[&str] = &[
    "changepoint",
    "funnel-mh",
    "funnel-slice",
    "funnel-parallel",
    "changepoint-quick",
    "funnel-mh-quick",
    "funnel-slice-quick",
    "toy",
];

pub fn preset(name: &str) -> Option<&'static str> {
    Some(match name {
        "changepoint" => CHANGEPOINT,
        "funnel-mh" => FUNNEL_MH,
        "funnel-slice" => FUNNEL_SLICE,
        "funnel-parallel" => FUNNEL_PARALLEL,
        "changepoint-quick" => CHANGEPOINT_QUICK,
        "funnel-mh-quick" => FUNNEL_MH_QUICK,
        "funnel-slice-quick" => FUNNEL_SLICE_QUICK,
        "toy" => TOY,
        _ => return None,
    })
}

macro_rules! changepoint {
    ($width:literal) => {
        concat!(
            "
[target]
kind = changepoint
width = ",
            $width,
            "
data_seed = 1

# uniform-cube widths per temperature level
[sampler]
kind = uniform-cube
width = 12, 7, 4, 2.5, 1.7, 1.2

[sampler.b]
kind = slice
interval = 0.1
updates = 2

[diagnostic]
checkpoint = 25
epsilon = 0.05
sigma = mb

[schedule]
t0 = 50
ratio = 0.5
levels = 6

[run]
start = random
"
        )
    };
}

macro_rules! funnel {
    () => {
        "
[target]
kind = funnel
x_sd = 3
dims = 10
bound = 30
width = 0.01

[diagnostic]
checkpoint = 100
epsilon = 0.01
sigma = mb
"
    };
}

macro_rules! funnel_mh {
    () => {
        "
[sampler]
kind = truncated-normal
sd = 1.0
updates = 1300

[sampler.b]
kind = slice
interval = 1.0
updates = 1200
"
    };
}

macro_rules! funnel_slice {
    () => {
        "
[sampler]
kind = slice
interval = 1.0
updates = 1200
"
    };
}

const CHANGEPOINT: &str = changepoint!("0.01");
const CHANGEPOINT_QUICK: &str = changepoint!("0.1");

const FUNNEL_MH: &str = concat!(funnel!(), funnel_mh!(), "\n[run]\nstart = x:0\nhistogram_bins = 50\n");
const FUNNEL_SLICE: &str = concat!(funnel!(), funnel_slice!(), "\n[run]\nstart = x:0\nhistogram_bins = 50\n");
const FUNNEL_PARALLEL: &str = concat!(funnel!(), funnel_slice!(), "\n[run]\nmode = parallel\nhistogram_bins = 50\n");

// 500 iterations instead of running until the relative difference settles
const FUNNEL_MH_QUICK: &str = concat!(
    funnel!(),
    funnel_mh!(),
    "\n[run]\nstart = x:0\niterations = 500\nmax_iterations = 500\nhistogram_bins = 50\n"
);
const FUNNEL_SLICE_QUICK: &str = concat!(
    funnel!(),
    funnel_slice!(),
    "\n[run]\nstart = x:0\niterations = 500\nmax_iterations = 500\nhistogram_bins = 50\n"
);

const TOY: &str = "
[target]
kind = toy
name = two-well
states = 9
barrier = 3

[sampler]
kind = truncated-normal
sd = 2

[diagnostic]
checkpoint = 500
epsilon = 0.01
sigma = plugin

[run]
start = origin
";
