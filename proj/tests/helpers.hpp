#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "spectrace/fsutil.hpp"

namespace testutil {

namespace fs = std::filesystem;

inline fs::path fixture_dir() {
    return fs::path(FIXTURE_DIR);
}

inline fs::path nfc_repo() {
    return fixture_dir() / "nfc_repo";
}

inline fs::path nfc_spec() {
    return fixture_dir() / "nfc_spec.md";
}

// Unique scratch directory, removed on destruction.
struct TempDir {
    fs::path path;

    TempDir() {
        static std::atomic<unsigned> counter{0};
        auto base = fs::temp_directory_path() / "spectrace_tests";
        fs::create_directories(base);
        std::random_device rd;
        path = base / ("t" + std::to_string(rd()) + "_" + std::to_string(counter.fetch_add(1)));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
};

inline void write_file(const fs::path& p, const std::string& content) {
    spectrace::write_file_atomic(p, content);
}

} // namespace testutil
