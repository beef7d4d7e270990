#include "proofloop/jsonl.hpp"

#include <fstream>
#include <sstream>

#include "proofloop/errors.hpp"

namespace proofloop::jsonl {

std::vector<json> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<json> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded())
            throw IoError(path.string() + ":" + std::to_string(lineno) + ": malformed JSON line");
        out.push_back(std::move(j));
    }
    return out;
}

namespace {

void write_lines(std::ofstream& out, const std::filesystem::path& path, const std::vector<json>& records) {
    for (const auto& r : records) out << r.dump() << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace

void write_file(const std::filesystem::path& path, const std::vector<json>& records) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    write_lines(out, path, records);
}

void append_file(const std::filesystem::path& path, const std::vector<json>& records) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) throw IoError("cannot open " + path.string() + " for appending");
    write_lines(out, path, records);
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << content;
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace proofloop::jsonl
