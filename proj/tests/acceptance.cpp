// Acceptance runner: one PASS/FAIL line per criterion, details for failures.
// Usage: acceptance [--check ID]... [--t N] [--seed S]

#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "cqw/verify.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> ids;
    cqw::VerifyOptions opt;
    for (int i = 1; i < argc; ++i) {
        const bool has_value = i + 1 < argc;
        if (!std::strcmp(argv[i], "--check") && has_value) {
            ids.emplace_back(argv[++i]);
        } else if (!std::strcmp(argv[i], "--t") && has_value) {
            opt.t = std::stoi(argv[++i]);
        } else if (!std::strcmp(argv[i], "--seed") && has_value) {
            opt.seed = std::stoull(argv[++i]);
        } else {
            std::fprintf(stderr, "usage: %s [--check ID]... [--t N] [--seed S]\n", argv[0]);
            return 1;
        }
    }

    int failed = 0;
    const auto& all = cqw::verification_checks();
    for (const auto& r : cqw::run_checks(ids, opt)) {
        std::size_t number = 0;
        while (number < all.size() && r.id != all[number].id) ++number;
        std::printf("%s  criterion %2zu  %-20s %8.3f s  %s\n", r.passed() ? "PASS" : "FAIL", number + 1, r.id.c_str(), r.seconds,
                    r.description.c_str());
        for (const auto& m : r.measurements) {
            std::printf("        %s %-44s %-11s value %.10g target %.10g error %.3g tol %.3g%s\n", m.passed ? "ok " : "BAD",
                        m.name.c_str(), m.method.c_str(), m.value, m.target, m.error, m.tolerance, m.relative ? " (rel)" : "");
        }
        if (!r.within_time()) std::printf("        BAD runtime %.3f s exceeds %.0f s\n", r.seconds, r.time_limit);
        failed += !r.passed();
    }
    return failed ? 2 : 0;
}
