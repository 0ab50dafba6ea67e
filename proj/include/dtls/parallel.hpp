#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "dtls/errors.hpp"

namespace dtls {

// Runs job(i) for i in [0, n) on up to `threads` workers. An exception thrown
// for index i is stored in errors[i]; nothing is rethrown here.
inline void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& job,
                         std::vector<std::exception_ptr>& errors) {
    errors.assign(n, nullptr);
    const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                job(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (workers <= 1) {
        worker();
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
}

inline std::string delta_label(double delta) {
    std::ostringstream os;
    os << "delta = " << delta;
    return os.str();
}

// Rethrows the first stored exception (in index order), with context(i)
// prepended to the message. The exception category is preserved for
// NumericError, ConfigError, IoError and std::invalid_argument.
inline void rethrow_first(const std::vector<std::exception_ptr>& errors,
                          const std::function<std::string(std::size_t)>& context) {
    for (std::size_t i = 0; i < errors.size(); ++i) {
        if (!errors[i]) continue;
        const std::string where = context(i) + ": ";
        try {
            std::rethrow_exception(errors[i]);
        } catch (const NumericError& e) {
            throw NumericError(where + e.detail(), e.time_reached());
        } catch (const ConfigError& e) {
            throw ConfigError(e.key_path(), where + e.detail());
        } catch (const IoError& e) {
            throw IoError(where + e.what());
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument(where + e.what());
        } catch (const std::exception& e) {
            throw std::runtime_error(where + e.what());
        }
    }
}

} // namespace dtls
