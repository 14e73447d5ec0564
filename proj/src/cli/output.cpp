#include "cli/output.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#include <openssl/evp.h>

#ifndef HYL_VERSION
#define HYL_VERSION "0.0.0"
#endif

namespace hyl::cli {

namespace {

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

nlohmann::json cell_json(const Cell& c, int precision) {
  if (std::holds_alternative<std::monostate>(c)) return nullptr;
  if (const auto* v = std::get_if<long>(&c)) return *v;
  if (const auto* s = std::get_if<std::string>(&c)) return *s;
  const double v = std::get<double>(c);
  if (!std::isfinite(v)) return format_number(v, precision);
  return std::strtod(format_number(v, precision).c_str(), nullptr);
}

}  // namespace

std::string format_number(double v, int precision) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", precision, v);
  return buf;
}

std::string format_cell(const Cell& c, int precision) {
  if (std::holds_alternative<std::monostate>(c)) return "";
  if (const auto* v = std::get_if<long>(&c)) return std::to_string(*v);
  if (const auto* s = std::get_if<std::string>(&c)) return *s;
  return format_number(std::get<double>(c), precision);
}

std::string git_blob_hash(const std::string& content) {
  const std::string header = "blob " + std::to_string(content.size()) + '\0';
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr);
  EVP_DigestUpdate(ctx, header.data(), header.size());
  EVP_DigestUpdate(ctx, content.data(), content.size());
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 0xf];
  }
  return out;
}

std::string render_csv(const Table& t, const RunConfig& cfg) {
  std::string body = "schema=1\n";
  for (std::size_t i = 0; i < t.columns.size(); ++i) body += (i ? "," : "") + t.columns[i];
  body += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) body += (i ? "," : "") + csv_escape(format_cell(row[i], cfg.precision));
    body += '\n';
  }
  std::string footer = "# tool=hyl version=" HYL_VERSION "\n";
  footer += "# params=" + to_json(cfg).dump() + "\n";
  for (const auto& n : t.notices) footer += "# notice=" + n + "\n";
  footer += "# content_hash=" + git_blob_hash(body) + "\n";
  return body + footer;
}

nlohmann::json render_json(const Table& t, const RunConfig& cfg) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : t.rows) {
    nlohmann::json r = nlohmann::json::object();
    for (std::size_t i = 0; i < row.size(); ++i) r[t.columns[i]] = cell_json(row[i], cfg.precision);
    rows.push_back(std::move(r));
  }
  nlohmann::json j;
  j["schema"] = 1;
  j["config"] = to_json(cfg);
  j["columns"] = t.columns;
  j["rows"] = rows;
  j["provenance"] = {{"tool", "hyl"},
                     {"version", HYL_VERSION},
                     {"notices", t.notices},
                     {"content_hash", git_blob_hash(rows.dump())}};
  return j;
}

std::string render(const Table& t, const RunConfig& cfg) {
  return cfg.format == "json" ? render_json(t, cfg).dump(2) + "\n" : render_csv(t, cfg);
}

void emit(const Table& t, const RunConfig& cfg) {
  const std::string text = render(t, cfg);
  if (cfg.out.empty()) {
    std::cout << text << std::flush;
    return;
  }
  std::ofstream out(cfg.out, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + cfg.out + "'");
  out << text;
}

}  // namespace hyl::cli
