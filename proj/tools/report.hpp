#pragma once

// Buffered CSV output with a config-digest header. Nothing is written until the whole
// computation has succeeded, so a failed run leaves no partial file behind.

#include <CLI11.hpp>

#include <sstream>
#include <string>
#include <vector>

namespace cmvdyn::cli {

/// Lowercase hex SHA-256.
std::string sha256_hex(const std::string& data);

/// `command=<name>` followed by `option=value` lines sorted by option name, with values as
/// parsed (or the default when the option was not given). Options in `excluded` (output
/// paths) are left out so the digest only depends on what was computed.
std::string canonical_config(const CLI::App& sub, const std::vector<std::string>& excluded);

/// %.17g, so values round-trip and the bytes do not depend on locale or stream state.
std::string num(double x);

class Report {
public:
    explicit Report(std::vector<std::string> columns);

    void comment(const std::string& line) { comments_.push_back(line); }
    void row(const std::vector<std::string>& cells);

    /// Writes `# config-digest: <sha256>`, the comments, the column line and the rows to
    /// `path` ("-" for stdout). Files are written to a temporary name and renamed.
    void write(const std::string& path, const std::string& digest) const;

private:
    std::vector<std::string> columns_;
    std::vector<std::string> comments_;
    std::ostringstream body_;
};

/// Writes `text` to `path` through a temporary file and rename.
void write_file(const std::string& path, const std::string& text);

}  // namespace cmvdyn::cli
