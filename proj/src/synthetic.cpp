#include "iotguard/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "iotguard/errors.hpp"
#include "iotguard/numfmt.hpp"
#include "iotguard/rng.hpp"

namespace iotguard {

namespace {

// One connection record in schema order, pre-label.
struct Record {
  double duration = 0;
  std::string protocol = "tcp";
  std::string service = "http";
  std::string flag = "SF";
  double src_bytes = 0, dst_bytes = 0;
  double land = 0, wrong_fragment = 0, urgent = 0, hot = 0;
  double num_failed_logins = 0, logged_in = 0, num_compromised = 0;
  double root_shell = 0, su_attempted = 0, num_root = 0, num_file_creations = 0;
  double num_shells = 0, num_access_files = 0, num_outbound_cmds = 0;
  double is_host_login = 0, is_guest_login = 0;
  double count = 1, srv_count = 1;
  double serror_rate = 0, srv_serror_rate = 0, rerror_rate = 0, srv_rerror_rate = 0;
  double same_srv_rate = 1, diff_srv_rate = 0, srv_diff_host_rate = 0;
  double dst_host_count = 255, dst_host_srv_count = 255;
  double dst_host_same_srv_rate = 1, dst_host_diff_srv_rate = 0;
  double dst_host_same_src_port_rate = 0, dst_host_srv_diff_host_rate = 0;
  double dst_host_serror_rate = 0, dst_host_srv_serror_rate = 0;
  double dst_host_rerror_rate = 0, dst_host_srv_rerror_rate = 0;
};

double rate(double v) { return std::round(std::clamp(v, 0.0, 1.0) * 100.0) / 100.0; }

double lognormal_int(Rng& rng, double mu, double sigma) {
  return std::floor(std::exp(rng.normal(mu, sigma)));
}

// Traffic-shape features shared by every profile. Two latent host factors —
// diversity of peers and service concentration — drive all the derived
// counters, the way the dataset's per-host statistics move together. The
// block is label-independent: benign hosts and slow scanners draw from the
// same distribution.
void fill_ambient(Record& r, Rng& rng, bool busy) {
  const double diversity = rng.uniform();
  const double focus = rng.uniform();
  auto jitter = [&rng](double v) { return v + rng.uniform(-0.01, 0.01); };

  r.count = std::floor(1 + diversity * (busy ? 24 : 10));
  r.srv_count = std::max(1.0, std::round(r.count * (0.8 + 0.2 * focus)));

  r.same_srv_rate = rate(jitter(1.0 - 0.7 * diversity * (1.0 - focus)));
  r.diff_srv_rate = rate(jitter(0.6 * diversity * (1.0 - focus)));
  r.srv_diff_host_rate = rate(jitter(0.5 * diversity));

  r.dst_host_count = std::floor(20 + 235 * diversity);
  r.dst_host_srv_count = std::max(1.0, std::floor(r.dst_host_count * (0.3 + 0.7 * focus)));
  r.dst_host_same_srv_rate = rate(jitter(0.2 + 0.8 * focus));
  r.dst_host_diff_srv_rate = rate(jitter(0.5 * (1.0 - focus)));
  r.dst_host_same_src_port_rate = rate(jitter(focus * focus));
  r.dst_host_srv_diff_host_rate = rate(jitter(0.3 * diversity * (1.0 - focus)));
}

void fill_rejected(Record& r, Rng& rng) {
  r.flag = "REJ";
  r.src_bytes = 0;
  r.dst_bytes = 0;
  r.logged_in = 0;
  r.rerror_rate = 1.0;
  r.srv_rerror_rate = 1.0;
  r.dst_host_rerror_rate = rate(rng.uniform(0.5, 1.0));
  r.dst_host_srv_rerror_rate = r.dst_host_rerror_rate;
}

// Rare destination services: the long tail that slow scanners probe and
// ordinary hosts almost never touch.
const std::array<const char*, 44> kRareServices = {
    "netbios_ns", "netbios_dgm", "netbios_ssn", "sql_net",  "vmnet",      "bgp",
    "ctf",        "daytime",     "discard",     "echo",     "efs",        "exec",
    "gopher",     "hostnames",   "imap4",       "iso_tsap", "klogin",     "kshell",
    "ldap",       "link",        "login",       "mtp",      "name",       "netstat",
    "nnsp",       "nntp",        "pm_dump",     "printer",  "remote_job", "rje",
    "shell",      "sunrpc",      "supdup",      "systat",   "uucp",       "uucp_path",
    "whois",      "Z39_50",      "csnet_ns",    "X11",      "private",    "other",
    "tim_i",      "red_i"};

// --- normal traffic profiles ---

Record normal_web(Rng& rng) {
  Record r;
  r.service = "http";
  fill_ambient(r, rng, true);
  r.duration = rng.uniform() < 0.85 ? 0 : std::floor(rng.uniform(1, 6));
  r.src_bytes = lognormal_int(rng, 5.5, 0.5);
  r.dst_bytes = lognormal_int(rng, 7.6, 0.9);
  // the occasional enormous transfer dominates the column range
  if (rng.uniform() < 0.003) r.src_bytes *= std::floor(rng.uniform(500, 5000));
  if (rng.uniform() < 0.003) r.dst_bytes *= std::floor(rng.uniform(100, 2000));
  r.logged_in = 1;
  r.hot = rng.uniform() < 0.98 ? 0 : std::floor(rng.uniform(1, 3));
  return r;
}

Record normal_mail(Rng& rng) {
  Record r;
  r.service = "smtp";
  fill_ambient(r, rng, true);
  r.duration = std::floor(rng.uniform(0, 4));
  r.src_bytes = lognormal_int(rng, 6.9, 0.35);
  r.dst_bytes = std::floor(rng.uniform(300, 420));
  r.logged_in = 1;
  return r;
}

Record normal_file(Rng& rng) {
  Record r;
  r.service = "ftp_data";
  fill_ambient(r, rng, true);
  r.src_bytes = lognormal_int(rng, 8.0, 1.1);
  if (rng.uniform() < 0.005) r.src_bytes *= std::floor(rng.uniform(100, 2000));
  r.dst_bytes = 0;
  r.logged_in = 1;
  r.is_guest_login = rng.uniform() < 0.1 ? 1 : 0;
  return r;
}

Record normal_dns(Rng& rng) {
  Record r;
  r.protocol = "udp";
  r.service = "domain_u";
  fill_ambient(r, rng, false);
  r.src_bytes = std::floor(rng.uniform(40, 62));
  r.dst_bytes = std::floor(rng.uniform(40, 135));
  return r;
}

Record normal_interactive(Rng& rng) {
  Record r;
  const double pick = rng.uniform();
  r.service = pick < 0.35 ? "telnet" : pick < 0.6 ? "ftp" : pick < 0.8 ? "pop_3" : "finger";
  if (rng.uniform() < 0.03) {
    r.service = kRareServices[rng.bounded(kRareServices.size() - 2)];  // odd but benign
  }
  fill_ambient(r, rng, false);
  r.duration = std::floor(rng.uniform(0, 120));
  if (rng.uniform() < 0.01) r.duration = std::floor(rng.uniform(1000, 4000));
  r.src_bytes = lognormal_int(rng, 5.0, 1.0);
  r.dst_bytes = lognormal_int(rng, 6.0, 1.2);
  r.logged_in = rng.uniform() < 0.7 ? 1 : 0;
  r.num_failed_logins = rng.uniform() < 0.995 ? 0 : 1;
  r.num_compromised = rng.uniform() < 0.997 ? 0 : std::floor(rng.uniform(1, 3));
  r.num_file_creations = rng.uniform() < 0.99 ? 0 : std::floor(rng.uniform(1, 4));
  r.num_access_files = rng.uniform() < 0.99 ? 0 : 1;
  if (rng.uniform() < 0.05) fill_rejected(r, rng);
  return r;
}

Record normal_icmp(Rng& rng) {
  Record r;
  r.protocol = "icmp";
  const double pick = rng.uniform();
  r.service = pick < 0.5 ? "eco_i" : pick < 0.85 ? "ecr_i" : "urp_i";
  fill_ambient(r, rng, false);
  r.src_bytes = pick < 0.5 ? 8 : pick < 0.85 ? (rng.uniform() < 0.5 ? 520 : 1032) : 105;
  r.dst_bytes = 0;
  return r;
}

// --- attacks ---

// Slow reconnaissance: ambient features indistinguishable from quiet normal
// hosts; what gives it away is the probed long-tail service plus the
// characteristic near-zero payload.
Record attack_stealth_probe(Rng& rng) {
  Record r;
  const double proto = rng.uniform();
  if (proto < 0.85) {
    r.protocol = "tcp";
    r.service = kRareServices[rng.bounded(kRareServices.size() - 2)];
  } else if (proto < 0.95) {
    r.protocol = "udp";
    r.service = kRareServices[rng.bounded(kRareServices.size() - 2)];
  } else {
    r.protocol = "icmp";
    r.service = rng.uniform() < 0.5 ? "tim_i" : "red_i";
  }
  fill_ambient(r, rng, false);
  r.src_bytes = rng.uniform() < 0.5 ? 0 : std::floor(rng.uniform(1, 50));
  r.dst_bytes = rng.uniform() < 0.6 ? 0 : std::floor(rng.uniform(1, 200));
  r.logged_in = 0;
  if (rng.uniform() < 0.05) fill_rejected(r, rng);
  return r;
}

Record attack_neptune(Rng& rng) {
  Record r;
  r.service = rng.uniform() < 0.8 ? "private" : "telnet";
  r.flag = "S0";
  fill_ambient(r, rng, false);
  r.src_bytes = 0;
  r.dst_bytes = 0;
  r.count = std::floor(rng.uniform(80, 312));
  r.srv_count = std::floor(rng.uniform(1, 20));
  r.serror_rate = 1.0;
  r.srv_serror_rate = 1.0;
  r.same_srv_rate = rate(rng.uniform(0, 0.08));
  r.diff_srv_rate = rate(0.05 + rng.uniform(0, 0.04));
  r.dst_host_count = 255;
  r.dst_host_srv_count = std::floor(rng.uniform(1, 30));
  r.dst_host_serror_rate = 1.0;
  r.dst_host_srv_serror_rate = 1.0;
  return r;
}

Record attack_smurf(Rng& rng) {
  Record r;
  r.protocol = "icmp";
  r.service = "ecr_i";
  fill_ambient(r, rng, false);
  r.src_bytes = rng.uniform() < 0.9 ? 1032 : 520;
  r.dst_bytes = 0;
  r.count = std::floor(rng.uniform(350, 512));
  r.srv_count = r.count;
  r.dst_host_count = 255;
  r.dst_host_srv_count = 255;
  r.dst_host_same_src_port_rate = 1.0;
  return r;
}

const char* stealth_label(Rng& rng) {
  const double u = rng.uniform();
  if (u < 0.40) return "satan.";
  if (u < 0.70) return "portsweep.";
  if (u < 0.85) return "nmap.";
  return "ipsweep.";
}

void append_record(std::string& out, const Record& r, const char* label) {
  out += format_csv(r.duration);
  out += ',';
  out += r.protocol;
  out += ',';
  out += r.service;
  out += ',';
  out += r.flag;
  out += ',';
  for (double v : {r.src_bytes, r.dst_bytes, r.land, r.wrong_fragment, r.urgent, r.hot,
                   r.num_failed_logins, r.logged_in, r.num_compromised, r.root_shell,
                   r.su_attempted, r.num_root, r.num_file_creations, r.num_shells,
                   r.num_access_files, r.num_outbound_cmds, r.is_host_login, r.is_guest_login,
                   r.count, r.srv_count, r.serror_rate, r.srv_serror_rate, r.rerror_rate,
                   r.srv_rerror_rate, r.same_srv_rate, r.diff_srv_rate, r.srv_diff_host_rate,
                   r.dst_host_count, r.dst_host_srv_count, r.dst_host_same_srv_rate,
                   r.dst_host_diff_srv_rate, r.dst_host_same_src_port_rate,
                   r.dst_host_srv_diff_host_rate, r.dst_host_serror_rate,
                   r.dst_host_srv_serror_rate, r.dst_host_rerror_rate,
                   r.dst_host_srv_rerror_rate}) {
    out += format_csv(v);
    out += ',';
  }
  out += label;
  out += '\n';
}

}  // namespace

std::string generate_kdd_csv(const SyntheticConfig& cfg) {
  if (cfg.rows < 0) throw ConfigError("synthetic rows must be non-negative");
  if (cfg.attack_fraction < 0.0 || cfg.attack_fraction > 1.0) {
    throw ConfigError("attack fraction must be in [0, 1]");
  }
  Rng rng(cfg.seed);
  std::string out;
  out.reserve(static_cast<std::size_t>(cfg.rows) * 120);
  for (std::int64_t i = 0; i < cfg.rows; ++i) {
    if (rng.uniform() < cfg.attack_fraction) {
      const double style = rng.uniform();
      if (style < 0.95) {
        append_record(out, attack_stealth_probe(rng), stealth_label(rng));
      } else if (style < 0.985) {
        append_record(out, attack_neptune(rng), "neptune.");
      } else {
        append_record(out, attack_smurf(rng), "smurf.");
      }
    } else {
      const double u = rng.uniform();
      Record r;
      if (u < 0.40) {
        r = normal_web(rng);
      } else if (u < 0.55) {
        r = normal_mail(rng);
      } else if (u < 0.65) {
        r = normal_file(rng);
      } else if (u < 0.85) {
        r = normal_dns(rng);
      } else if (u < 0.95) {
        r = normal_interactive(rng);
      } else {
        r = normal_icmp(rng);
      }
      append_record(out, r, "normal.");
    }
  }
  return out;
}

LabeledDataset generate_kdd_traffic(const SyntheticConfig& cfg) {
  std::istringstream stream(generate_kdd_csv(cfg));
  return load_kddcup(stream, kdd_schema(), "<synthetic>");
}

}  // namespace iotguard
