#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mma/kernels.hpp"
#include "mma/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using Clock = std::chrono::steady_clock;

std::vector<double> random_vec(std::size_t n, mma::RngStream& rng) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(-1.0, 1.0);
    return v;
}

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Repeats fn until ~min_time elapses, returns seconds per call.
template <typename F>
double time_call(F&& fn, double min_time) {
    fn();  // warm up
    int reps = 1;
    for (;;) {
        const auto t0 = Clock::now();
        for (int r = 0; r < reps; ++r) fn();
        const double dt = seconds_since(t0);
        if (dt >= min_time || reps > (1 << 20)) return dt / reps;
        reps *= 2;
    }
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double worst = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        worst = std::max(worst, std::fabs(a[i] - b[i]));
    return worst;
}

struct Case {
    std::string name;
    double serial_s = 0;
    double parallel_s = 0;
    double diff = 0;
};

void print_row(const Case& c) {
    std::printf("%-24s %12.3f %12.3f %8.2fx %10.1e\n", c.name.c_str(),
                c.serial_s * 1e6, c.parallel_s * 1e6,
                c.parallel_s > 0 ? c.serial_s / c.parallel_s : 0.0, c.diff);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"serial vs OpenMP kernel comparison"};
    bool quick = false;
    int threads = 0;
    app.add_flag("--quick", quick, "small sizes, short timing windows");
    app.add_option("--threads", threads, "OpenMP thread count (0 = runtime default)");
    CLI11_PARSE(app, argc, argv);

#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
    std::printf("OpenMP enabled, max threads %d\n", omp_get_max_threads());
#else
    (void)threads;
    std::printf("built without OpenMP; parallel backend runs serially\n");
#endif

    const double min_time = quick ? 0.02 : 0.2;
    const std::size_t m = quick ? 96 : 384;
    const std::size_t k = quick ? 96 : 384;
    const std::size_t n = quick ? 96 : 384;
    const std::size_t veclen = quick ? (1u << 16) : (1u << 22);

    mma::RngStream rng(42);
    const auto a = random_vec(m * k, rng);
    const auto b = random_vec(k * n, rng);
    const auto g = random_vec(m * n, rng);
    const auto x = random_vec(veclen, rng);
    const auto y = random_vec(veclen, rng);
    std::vector<double> out_s;
    std::vector<double> out_p;

    std::printf("%-24s %12s %12s %9s %10s\n", "kernel", "serial us", "parallel us",
                "speedup", "max|diff|");

    std::vector<Case> cases;
    // The grad kernels accumulate (+=), so correctness uses one fresh call per
    // backend after the timing loops.
    const auto matmul_case = [&](const std::string& name, std::size_t out_len,
                                 auto serial_fn, auto parallel_fn) {
        Case c{name};
        out_s.assign(out_len, 0.0);
        out_p.assign(out_len, 0.0);
        c.serial_s = time_call([&] { serial_fn(out_s); }, min_time);
        c.parallel_s = time_call([&] { parallel_fn(out_p); }, min_time);
        out_s.assign(out_len, 0.0);
        serial_fn(out_s);
        out_p.assign(out_len, 0.0);
        parallel_fn(out_p);
        c.diff = max_abs_diff(out_s, out_p);
        print_row(c);
        cases.push_back(c);
    };
    matmul_case(
        "matmul " + std::to_string(m) + "^3", m * n,
        [&](std::vector<double>& o) {
            mma::kernels::serial::matmul(a.data(), b.data(), o.data(), m, k, n);
        },
        [&](std::vector<double>& o) {
            mma::kernels::parallel::matmul(a.data(), b.data(), o.data(), m, k, n);
        });
    matmul_case(
        "matmul_grad_a", m * k,
        [&](std::vector<double>& o) {
            mma::kernels::serial::matmul_grad_a(g.data(), b.data(), o.data(), m, k, n);
        },
        [&](std::vector<double>& o) {
            mma::kernels::parallel::matmul_grad_a(g.data(), b.data(), o.data(), m, k, n);
        });
    matmul_case(
        "matmul_grad_b", k * n,
        [&](std::vector<double>& o) {
            mma::kernels::serial::matmul_grad_b(a.data(), g.data(), o.data(), m, k, n);
        },
        [&](std::vector<double>& o) {
            mma::kernels::parallel::matmul_grad_b(a.data(), g.data(), o.data(), m, k, n);
        });

    const auto elementwise = [&](const std::string& name, auto serial_fn, auto parallel_fn) {
        Case c{name + " n=" + std::to_string(veclen)};
        out_s.assign(veclen, 0.0);
        out_p.assign(veclen, 0.0);
        c.serial_s = time_call([&] { serial_fn(out_s); }, min_time);
        c.parallel_s = time_call([&] { parallel_fn(out_p); }, min_time);
        c.diff = max_abs_diff(out_s, out_p);
        print_row(c);
        cases.push_back(c);
    };
    elementwise(
        "add",
        [&](std::vector<double>& o) {
            mma::kernels::serial::add(x.data(), y.data(), o.data(), veclen);
        },
        [&](std::vector<double>& o) {
            mma::kernels::parallel::add(x.data(), y.data(), o.data(), veclen);
        });
    elementwise(
        "mul",
        [&](std::vector<double>& o) {
            mma::kernels::serial::mul(x.data(), y.data(), o.data(), veclen);
        },
        [&](std::vector<double>& o) {
            mma::kernels::parallel::mul(x.data(), y.data(), o.data(), veclen);
        });
    elementwise(
        "tanh_forward",
        [&](std::vector<double>& o) {
            mma::kernels::serial::tanh_forward(x.data(), o.data(), veclen);
        },
        [&](std::vector<double>& o) {
            mma::kernels::parallel::tanh_forward(x.data(), o.data(), veclen);
        });
    elementwise(
        "sigmoid_forward",
        [&](std::vector<double>& o) {
            mma::kernels::serial::sigmoid_forward(x.data(), o.data(), veclen);
        },
        [&](std::vector<double>& o) {
            mma::kernels::parallel::sigmoid_forward(x.data(), o.data(), veclen);
        });

    int mismatches = 0;
    for (const Case& c : cases) mismatches += c.diff != 0.0;
    if (mismatches > 0) {
        std::printf("FAIL: %d kernels differ between backends\n", mismatches);
        return 1;
    }
    std::printf("all kernels bit-identical across backends\n");
    return 0;
}
