#include "wkbsplit/grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <map>
#include <mutex>

// FFTW backend. Plan creation is serialized by a global mutex (FFTW's planner
// is not thread-safe); execution happens on thread-local buffers so distinct
// fields can transform concurrently. FFTW_ESTIMATE keeps planning cheap and
// reproducible.

namespace wkbsplit {

namespace {

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct Workspace {
    fftw_complex* buf = nullptr;
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
    std::size_t total = 0;

    Workspace(const Workspace&) = delete;
    Workspace& operator=(const Workspace&) = delete;

    Workspace(int rank, const int* dims, std::size_t total_) : total(total_) {
        std::lock_guard<std::mutex> lock(planner_mutex());
        buf = fftw_alloc_complex(total);
        fwd = fftw_plan_dft(rank, dims, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
        bwd = fftw_plan_dft(rank, dims, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    ~Workspace() {
        std::lock_guard<std::mutex> lock(planner_mutex());
        if (fwd) fftw_destroy_plan(fwd);
        if (bwd) fftw_destroy_plan(bwd);
        if (buf) fftw_free(buf);
    }
};

Workspace& workspace_for(const Grid& g) {
    thread_local std::map<std::array<int, 3>, Workspace> cache;
    std::array<int, 3> key{1, 1, 1};
    for (int a = 0; a < g.dim(); ++a) key[a] = g.n(a);
    auto it = cache.find(key);
    if (it == cache.end()) {
        int dims[3];
        for (int a = 0; a < g.dim(); ++a) dims[a] = g.n(a);
        it = cache.try_emplace(key, g.dim(), dims, g.size()).first;
    }
    return it->second;
}

ComplexField run(const ComplexField& u, bool forward) {
    Workspace& ws = workspace_for(u.grid);
    static_assert(sizeof(fftw_complex) == sizeof(cplx));
    std::memcpy(ws.buf, u.v.data(), u.size() * sizeof(cplx));
    fftw_execute(forward ? ws.fwd : ws.bwd);
    ComplexField out(u.grid);
    const double scale = 1.0 / std::sqrt(static_cast<double>(u.size()));
    const cplx* src = reinterpret_cast<const cplx*>(ws.buf);
    for (std::size_t i = 0; i < out.size(); ++i) out.v[i] = scale * src[i];
    return out;
}

}  // namespace

ComplexField fft_forward(const ComplexField& u) { return run(u, true); }

ComplexField fft_inverse(const ComplexField& u) { return run(u, false); }

ComplexField fft_forward(const RealField& u) { return run(to_complex(u), true); }

}  // namespace wkbsplit
