// Reference solutions from an interior-point conic solver, cross-checked
// by SQP from random starts (agreement ≤ 3e-12).

pub struct MetricCase {
    pub m: &'static [f64],
    pub edges: &'static [(usize, usize, f64)],
    pub rho_e: f64,
    pub rho_s: f64,
}

// ρ between vertex 0 and the last vertex; ρ_S with jump size 1
pub const METRIC_CASES: [MetricCase; 10] = [
    MetricCase { m: &[1.425, 0.658, 1.349], edges: &[(0, 1, 0.42), (0, 2, 1.207), (1, 2, 1.849)], rho_e: 1.4137460316728225, rho_s: 0.9996694058713572 },
    MetricCase { m: &[0.606, 1.201, 0.896, 1.833, 0.929], edges: &[(0, 1, 1.502), (1, 2, 0.778), (1, 3, 0.979), (2, 3, 0.968), (3, 4, 0.951)], rho_e: 3.3758124485487953, rho_s: 2.3870598743823854 },
    MetricCase { m: &[1.057, 1.751, 1.023, 1.522], edges: &[(0, 1, 1.51), (1, 2, 0.887), (1, 3, 2.735)], rho_e: 1.8956030912704982, rho_s: 1.3403938002754974 },
    MetricCase {
        m: &[1.789, 0.52, 1.574, 1.185, 1.384, 0.72],
        edges: &[(0, 1, 0.267), (0, 3, 1.158), (0, 4, 0.904), (1, 2, 1.392), (1, 3, 1.614), (1, 5, 1.33), (2, 4, 1.113), (2, 5, 1.876), (3, 4, 0.876), (3, 5, 0.222), (4, 5, 1.34)],
        rho_e: 1.9646864637063863,
        rho_s: 1.3807007722424205,
    },
    MetricCase {
        m: &[1.875, 0.87, 1.229, 0.692, 1.075, 1.673],
        edges: &[(0, 1, 1.347), (0, 3, 1.422), (0, 4, 2.168), (0, 5, 0.983), (1, 2, 0.569), (1, 3, 0.751), (1, 5, 2.91), (2, 4, 1.937), (2, 5, 1.258), (3, 4, 0.996), (4, 5, 0.255)],
        rho_e: 1.3667397961877639,
        rho_s: 0.9664309780016627,
    },
    MetricCase {
        m: &[0.888, 1.055, 1.345, 1.86, 0.846, 0.724],
        edges: &[(0, 1, 2.565), (0, 5, 0.589), (1, 5, 0.81), (2, 5, 1.387), (3, 4, 0.565), (4, 5, 0.367)],
        rho_e: 1.2996981263657663,
        rho_s: 0.9190253586485932,
    },
    MetricCase { m: &[0.838, 1.343, 1.896, 1.744], edges: &[(0, 1, 0.634), (0, 2, 2.855), (1, 2, 2.385), (1, 3, 2.059), (2, 3, 1.202)], rho_e: 1.891901463327685, rho_s: 1.3377763540557817 },
    MetricCase { m: &[1.393, 1.298, 1.614], edges: &[(0, 2, 0.433), (1, 2, 2.209)], rho_e: 2.536568575571373, rho_s: 1.0 },
    MetricCase { m: &[0.767, 0.606, 1.512], edges: &[(0, 1, 1.132), (0, 2, 2.265), (1, 2, 2.535)], rho_e: 0.8176641036704784, rho_s: 0.5781758324381544 },
    MetricCase {
        m: &[1.818, 0.708, 0.704, 0.894, 1.75, 0.684],
        edges: &[(0, 4, 0.834), (0, 5, 2.815), (1, 3, 1.066), (1, 5, 2.299), (2, 5, 1.156), (3, 4, 0.607), (3, 5, 2.511), (4, 5, 0.893)],
        rho_e: 0.6971140713093896,
        rho_s: 0.49293408708382896,
    },
];
