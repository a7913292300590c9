#include "report.hpp"

#include "cmvdyn/error.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>

namespace cmvdyn::cli {

std::string sha256_hex(const std::string& data) {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 || EVP_DigestFinal_ex(ctx.get(), md, &len) != 1)
        fail(ErrorKind::numerical, "SHA-256 digest failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 0xF]);
    }
    return out;
}

std::string canonical_config(const CLI::App& sub, const std::vector<std::string>& excluded) {
    std::vector<std::pair<std::string, std::string>> entries;
    for (const CLI::Option* opt : sub.get_options()) {
        const std::string name = opt->get_single_name();
        if (name.empty() || name == "help" || std::find(excluded.begin(), excluded.end(), name) != excluded.end())
            continue;
        std::string value;
        if (opt->count() > 0) {
            for (const auto& r : opt->results()) value += (value.empty() ? "" : ",") + r;
        } else {
            value = opt->get_default_str();
        }
        entries.emplace_back(name, value);
    }
    std::sort(entries.begin(), entries.end());
    std::string out = "command=" + sub.get_name() + "\n";
    for (const auto& [k, v] : entries) out += k + "=" + v + "\n";
    return out;
}

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

Report::Report(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void Report::row(const std::vector<std::string>& cells) {
    if (cells.size() != columns_.size()) fail(ErrorKind::input, "CSV row does not match the column count");
    for (std::size_t i = 0; i < cells.size(); ++i) body_ << (i ? "," : "") << cells[i];
    body_ << '\n';
}

void Report::write(const std::string& path, const std::string& digest) const {
    std::ostringstream out;
    out << "# config-digest: " << digest << '\n';
    for (const auto& c : comments_) out << "# " << c << '\n';
    for (std::size_t i = 0; i < columns_.size(); ++i) out << (i ? "," : "") << columns_[i];
    out << '\n' << body_.str();
    write_file(path, out.str());
}

void write_file(const std::string& path, const std::string& text) {
    if (path == "-") {
        std::cout << text << std::flush;
        return;
    }
    const std::string tmp = path + ".partial";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) fail(ErrorKind::input, "cannot write " + path);
        f << text;
        if (!f.flush()) fail(ErrorKind::input, "cannot write " + path);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        fail(ErrorKind::input, "cannot rename " + tmp + " to " + path);
    }
}

}  // namespace cmvdyn::cli
