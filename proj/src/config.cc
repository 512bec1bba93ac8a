#include "osmp/config.h"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "osmp/error.h"

namespace osmp {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::kMissingKey: return "MissingKey";
    case Errc::kUnitViolation: return "UnitViolation";
    case Errc::kOrderingViolation: return "OrderingViolation";
    case Errc::kParseError: return "ParseError";
    case Errc::kOverflowShare: return "OverflowShare";
    case Errc::kNotASleepMode: return "NotASleepMode";
    case Errc::kDegeneratePowers: return "DegeneratePowers";
    case Errc::kFsNeverWorthwhile: return "FsNeverWorthwhile";
    case Errc::kBufferFillsTooSoon: return "BufferFillsTooSoon";
    case Errc::kInvalidState: return "InvalidState";
    case Errc::kModelRegime: return "ModelRegime";
    case Errc::kNoConvergence: return "NoConvergence";
    case Errc::kAmbiguousClass: return "AmbiguousClass";
    case Errc::kConditioningStarved: return "ConditioningStarved";
    case Errc::kOracleUnavailable: return "OracleUnavailable";
    case Errc::kEventStarvation: return "EventStarvation";
    case Errc::kUsage: return "Usage";
  }
  return "Unknown";
}

namespace {

void require_positive(double v, const char* key) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw Error(Errc::kUnitViolation, std::string(key) + " must be > 0");
  }
}

void require_non_negative(double v, const char* key) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw Error(Errc::kUnitViolation, std::string(key) + " must be >= 0");
  }
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Buffer keys accept exactly one of the _bits / _pkts spellings.
struct BufferKey {
  const char* stem;
  int OnuConfig::*field;
};

constexpr BufferKey kBufferKeys[] = {
    {"onu.n_th", &OnuConfig::n_th},
    {"onu.n_sz", &OnuConfig::n_sz},
    {"onu.n_m", &OnuConfig::n_m},
};

}  // namespace

void validate(const NetworkConfig& cfg) {
  if (cfg.n_onus < 1) throw Error(Errc::kUnitViolation, "network.n_onus must be >= 1");
  require_positive(cfg.link_rate_bps, "network.link_rate_bps");

  const auto& onu = cfg.onu;
  require_positive(onu.packet_bits, "onu.packet_bytes");
  require_positive(onu.max_rate_bps, "onu.max_rate_bps");
  require_non_negative(onu.lambda_pps, "onu.lambda_pps");
  if (onu.n_th <= 0) throw Error(Errc::kUnitViolation, "onu.n_th must be > 0");
  if (onu.n_m < 1) throw Error(Errc::kUnitViolation, "onu.n_m must be >= 1");
  if (onu.n_th > onu.n_sz) throw Error(Errc::kOrderingViolation, "onu.n_th must not exceed onu.n_sz");

  const auto& p = cfg.power;
  require_positive(p.on_w, "power.on_w");
  require_positive(p.doze_w, "power.dz_w");
  require_positive(p.fast_sleep_w, "power.fs_w");
  require_positive(p.deep_sleep_w, "power.ds_w");
  if (!(p.on_w > p.doze_w && p.doze_w > p.fast_sleep_w && p.fast_sleep_w > p.deep_sleep_w)) {
    throw Error(Errc::kOrderingViolation, "powers must satisfy on > dz > fs > ds");
  }

  const auto& t = cfg.timing;
  require_positive(t.wake_deep_s, "timing.t_sw_ds_s");
  require_positive(t.wake_fast_s, "timing.t_sw_fs_s");
  require_positive(t.wake_doze_s, "timing.t_sw_dz_s");
  require_positive(t.sleep_period_s, "timing.t_m_s");
  require_non_negative(t.report_s, "timing.t_report_s");
  require_non_negative(t.guard_s, "timing.t_guard_s");
  if (!(t.wake_deep_s > t.wake_fast_s && t.wake_fast_s > t.wake_doze_s)) {
    throw Error(Errc::kOrderingViolation, "wake-up times must satisfy ds > fs > dz");
  }
}

NetworkConfig default_config() { return NetworkConfig{}; }

int packets_from_bits(double bits, double packet_bits) {
  return static_cast<int>(std::floor(bits / packet_bits));
}

double packet_tx_time(const NetworkConfig& cfg) { return cfg.onu.packet_bits / cfg.link_rate_bps; }

double slot_time(const NetworkConfig& cfg) {
  return cfg.onu.n_m * packet_tx_time(cfg) + cfg.timing.report_s + cfg.timing.guard_s;
}

double cycle_time(const NetworkConfig& cfg) { return cfg.n_onus * slot_time(cfg); }

double load_of(const NetworkConfig& cfg) {
  return cfg.onu.lambda_pps * cfg.onu.packet_bits / cfg.onu.max_rate_bps;
}

NetworkConfig with_load(NetworkConfig cfg, double load) {
  cfg.onu.lambda_pps = load * cfg.onu.max_rate_bps / cfg.onu.packet_bits;
  return cfg;
}

void set_param(NetworkConfig& cfg, std::string_view key, double value) {
  auto as_int = [&](const char* k) {
    if (value != std::floor(value)) throw Error(Errc::kParseError, std::string(k) + " must be an integer");
    return static_cast<int>(value);
  };
  if (key == "network.n_onus" || key == "n_onus") cfg.n_onus = as_int("network.n_onus");
  else if (key == "network.link_rate_bps") cfg.link_rate_bps = value;
  else if (key == "onu.lambda_pps") cfg.onu.lambda_pps = value;
  else if (key == "onu.packet_bytes") cfg.onu.packet_bits = value * 8.0;
  else if (key == "onu.max_rate_bps") cfg.onu.max_rate_bps = value;
  else if (key == "onu.n_th_pkts" || key == "n_th") cfg.onu.n_th = as_int("onu.n_th_pkts");
  else if (key == "onu.n_sz_pkts" || key == "n_sz") cfg.onu.n_sz = as_int("onu.n_sz_pkts");
  else if (key == "onu.n_m_pkts" || key == "n_m") cfg.onu.n_m = as_int("onu.n_m_pkts");
  else if (key == "onu.n_th_bits") cfg.onu.n_th = packets_from_bits(value, cfg.onu.packet_bits);
  else if (key == "onu.n_sz_bits") cfg.onu.n_sz = packets_from_bits(value, cfg.onu.packet_bits);
  else if (key == "onu.n_m_bits") cfg.onu.n_m = packets_from_bits(value, cfg.onu.packet_bits);
  else if (key == "power.on_w" || key == "power.on") cfg.power.on_w = value;
  else if (key == "power.dz_w" || key == "power.dz") cfg.power.doze_w = value;
  else if (key == "power.fs_w" || key == "power.fs") cfg.power.fast_sleep_w = value;
  else if (key == "power.ds_w" || key == "power.ds") cfg.power.deep_sleep_w = value;
  else if (key == "timing.t_sw_ds_s" || key == "timing.t_sw_ds") cfg.timing.wake_deep_s = value;
  else if (key == "timing.t_sw_fs_s" || key == "timing.t_sw_fs") cfg.timing.wake_fast_s = value;
  else if (key == "timing.t_sw_dz_s" || key == "timing.t_sw_dz") cfg.timing.wake_doze_s = value;
  else if (key == "timing.t_m_s" || key == "timing.t_m") cfg.timing.sleep_period_s = value;
  else if (key == "timing.t_report_s" || key == "timing.t_report") cfg.timing.report_s = value;
  else if (key == "timing.t_guard_s" || key == "timing.t_guard") cfg.timing.guard_s = value;
  else if (key == "load") cfg = with_load(cfg, value);
  else throw Error(Errc::kParseError, "unknown key '" + std::string(key) + "'");
}

double get_param(const NetworkConfig& cfg, std::string_view key) {
  if (key == "network.n_onus" || key == "n_onus") return cfg.n_onus;
  if (key == "network.link_rate_bps") return cfg.link_rate_bps;
  if (key == "onu.lambda_pps") return cfg.onu.lambda_pps;
  if (key == "onu.packet_bytes") return cfg.onu.packet_bits / 8.0;
  if (key == "onu.max_rate_bps") return cfg.onu.max_rate_bps;
  if (key == "onu.n_th_pkts" || key == "n_th") return cfg.onu.n_th;
  if (key == "onu.n_sz_pkts" || key == "n_sz") return cfg.onu.n_sz;
  if (key == "onu.n_m_pkts" || key == "n_m") return cfg.onu.n_m;
  if (key == "power.on_w" || key == "power.on") return cfg.power.on_w;
  if (key == "power.dz_w" || key == "power.dz") return cfg.power.doze_w;
  if (key == "power.fs_w" || key == "power.fs") return cfg.power.fast_sleep_w;
  if (key == "power.ds_w" || key == "power.ds") return cfg.power.deep_sleep_w;
  if (key == "timing.t_sw_ds_s" || key == "timing.t_sw_ds") return cfg.timing.wake_deep_s;
  if (key == "timing.t_sw_fs_s" || key == "timing.t_sw_fs") return cfg.timing.wake_fast_s;
  if (key == "timing.t_sw_dz_s" || key == "timing.t_sw_dz") return cfg.timing.wake_doze_s;
  if (key == "timing.t_m_s" || key == "timing.t_m") return cfg.timing.sleep_period_s;
  if (key == "timing.t_report_s" || key == "timing.t_report") return cfg.timing.report_s;
  if (key == "timing.t_guard_s" || key == "timing.t_guard") return cfg.timing.guard_s;
  if (key == "load") return load_of(cfg);
  throw Error(Errc::kParseError, "unknown key '" + std::string(key) + "'");
}

NetworkConfig load_config(std::string_view text) {
  std::map<std::string, double, std::less<>> values;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(Errc::kParseError, "line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const auto key = trim(line.substr(0, eq));
    const auto raw = trim(line.substr(eq + 1));
    double v = 0.0;
    const auto [end, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), v);
    if (ec != std::errc{} || end != raw.data() + raw.size()) {
      throw Error(Errc::kParseError, "line " + std::to_string(line_no) + ": bad number for '" +
                                         std::string(key) + "'");
    }
    if (!values.emplace(std::string(key), v).second) {
      throw Error(Errc::kParseError, "duplicate key '" + std::string(key) + "'");
    }
  }

  auto take = [&](const std::string& key) -> std::optional<double> {
    auto it = values.find(key);
    if (it == values.end()) return std::nullopt;
    double v = it->second;
    values.erase(it);
    return v;
  };
  auto need = [&](const std::string& key) {
    auto v = take(key);
    if (!v) throw Error(Errc::kMissingKey, "missing key '" + key + "'");
    return *v;
  };

  NetworkConfig cfg;
  set_param(cfg, "network.n_onus", need("network.n_onus"));
  set_param(cfg, "network.link_rate_bps", need("network.link_rate_bps"));
  set_param(cfg, "onu.lambda_pps", need("onu.lambda_pps"));
  const double bytes = need("onu.packet_bytes");
  require_positive(bytes, "onu.packet_bytes");
  set_param(cfg, "onu.packet_bytes", bytes);
  if (auto v = take("onu.max_rate_bps")) set_param(cfg, "onu.max_rate_bps", *v);

  for (const auto& bk : kBufferKeys) {
    const std::string stem = bk.stem;
    auto bits = take(stem + "_bits");
    auto pkts = take(stem + "_pkts");
    if (bits && pkts) throw Error(Errc::kParseError, "give only one of " + stem + "_bits / _pkts");
    if (!bits && !pkts) throw Error(Errc::kMissingKey, "missing key '" + stem + "_pkts' (or _bits)");
    if (bits) {
      require_non_negative(*bits, (stem + "_bits").c_str());
      set_param(cfg, stem + "_bits", *bits);
    } else {
      set_param(cfg, stem + "_pkts", *pkts);
    }
  }

  for (const char* k : {"power.on_w", "power.dz_w", "power.fs_w", "power.ds_w", "timing.t_sw_ds_s",
                        "timing.t_sw_fs_s", "timing.t_sw_dz_s", "timing.t_m_s", "timing.t_report_s",
                        "timing.t_guard_s"}) {
    set_param(cfg, k, need(k));
  }

  if (!values.empty()) {
    throw Error(Errc::kParseError, "unknown key '" + values.begin()->first + "'");
  }
  validate(cfg);
  return cfg;
}

NetworkConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::kUsage, "cannot read config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return load_config(ss.str());
}

std::string serialize(const NetworkConfig& cfg) {
  std::ostringstream out;
  auto put = [&](const char* key, double v) { out << key << " = " << fmt_double(v) << '\n'; };
  put("network.n_onus", cfg.n_onus);
  put("network.link_rate_bps", cfg.link_rate_bps);
  put("onu.lambda_pps", cfg.onu.lambda_pps);
  put("onu.packet_bytes", cfg.onu.packet_bits / 8.0);
  put("onu.max_rate_bps", cfg.onu.max_rate_bps);
  put("onu.n_th_pkts", cfg.onu.n_th);
  put("onu.n_sz_pkts", cfg.onu.n_sz);
  put("onu.n_m_pkts", cfg.onu.n_m);
  put("power.on_w", cfg.power.on_w);
  put("power.dz_w", cfg.power.doze_w);
  put("power.fs_w", cfg.power.fast_sleep_w);
  put("power.ds_w", cfg.power.deep_sleep_w);
  put("timing.t_sw_ds_s", cfg.timing.wake_deep_s);
  put("timing.t_sw_fs_s", cfg.timing.wake_fast_s);
  put("timing.t_sw_dz_s", cfg.timing.wake_doze_s);
  put("timing.t_m_s", cfg.timing.sleep_period_s);
  put("timing.t_report_s", cfg.timing.report_s);
  put("timing.t_guard_s", cfg.timing.guard_s);
  return out.str();
}

}  // namespace osmp
