#include "torsionlab/torsionlab.h"

#include <chrono>
#include <fstream>
#include <sstream>
#include <string>

#include "torsionlab/commands.hpp"
#include "torsionlab/errors.hpp"

struct tl_operator {
  tl::Operator op;
};

struct tl_complex {
  tl::HilbertComplex c;
};

struct tl_report {
  tl::RunReport report;
  std::string json;
};

namespace {

thread_local std::string last_error;

tl_status to_c(tl::Status s) { return static_cast<tl_status>(static_cast<int>(s)); }

/// Runs f, converting exceptions to status codes and recording the message.
template <class F>
tl_status guarded(F&& f) {
  try {
    tl_status s = f();
    last_error.clear();
    return s;
  } catch (const std::exception& e) {
    last_error = e.what();
    return to_c(tl::status_for(e));
  } catch (...) {
    last_error = "unknown error";
    return TL_INTERNAL_ERROR;
  }
}

tl_status bad_argument(const char* what) {
  last_error = what;
  return TL_INPUT_ERROR;
}

std::string read_text(const char* path) {
  std::ifstream in(path);
  tl::require(static_cast<bool>(in), tl::ErrorKind::Parse, std::string(path) + ": cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <class F>
tl_status run_command(tl_report** out, F&& f) {
  if (!out) return bad_argument("null output pointer");
  *out = nullptr;
  return guarded([&] {
    auto start = std::chrono::steady_clock::now();
    tl::RunReport r = f();
    r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    *out = new tl_report{std::move(r), {}};
    return to_c((*out)->report.status());
  });
}

tl::Mat read_matrix(std::size_t rows, std::size_t cols, const double* re, const double* im) {
  tl::Mat m(static_cast<tl::Index>(rows), static_cast<tl::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      std::size_t k = r * cols + c;
      m(static_cast<tl::Index>(r), static_cast<tl::Index>(c)) = tl::cplx(re[k], im ? im[k] : 0.0);
    }
  return m;
}

}  // namespace

extern "C" {

const char* tl_version(void) { return "0.1.0"; }

const char* tl_last_error(void) { return last_error.c_str(); }

tl_status tl_operator_from_json(const char* json, tl_operator** out) {
  if (!json || !out) return bad_argument("null argument");
  *out = nullptr;
  return guarded([&] {
    *out = new tl_operator{tl::io::read_operator(tl::io::parse_text(json))};
    return TL_OK;
  });
}

tl_status tl_operator_scalar(size_t rows, size_t cols, const double* re, const double* im, tl_operator** out) {
  if (!out || (!re && rows * cols > 0)) return bad_argument("null argument");
  *out = nullptr;
  return guarded([&] {
    *out = new tl_operator{tl::Operator::scalar(read_matrix(rows, cols, re, im))};
    return TL_OK;
  });
}

tl_status tl_operator_trig_poly(size_t rows, size_t cols, size_t count, const int* powers, const double* re,
                                const double* im, tl_operator** out) {
  if (!out || !powers || !re || count == 0) return bad_argument("null argument or empty symbol");
  *out = nullptr;
  return guarded([&] {
    std::map<int, tl::Mat> terms;
    for (std::size_t k = 0; k < count; ++k) {
      tl::require(!terms.count(powers[k]), tl::ErrorKind::InvalidArgument, "trig_poly: duplicate frequency");
      terms[powers[k]] = read_matrix(rows, cols, re + k * rows * cols, im ? im + k * rows * cols : nullptr);
    }
    *out = new tl_operator{
        tl::Operator::trig_poly(static_cast<tl::Index>(rows), static_cast<tl::Index>(cols), std::move(terms))};
    return TL_OK;
  });
}

void tl_operator_free(tl_operator* op) { delete op; }

tl_status tl_operator_fk_log_det(const tl_operator* op, double* log_det, int* determinant_class) {
  if (!op || !log_det) return bad_argument("null argument");
  return guarded([&] {
    tl::FkResult f = tl::fk_log_det_report(op->op);
    *log_det = f.log_det;
    if (determinant_class) *determinant_class = f.verdict.is_determinant_class ? 1 : 0;
    return f.verdict.state == tl::DetClass::Unresolved ? TL_DIVERGENT : TL_OK;
  });
}

tl_status tl_complex_from_json(const char* json, tl_complex** out) {
  if (!json || !out) return bad_argument("null argument");
  *out = nullptr;
  return guarded([&] {
    *out = new tl_complex{tl::io::read_complex(tl::io::parse_text(json))};
    return TL_OK;
  });
}

tl_status tl_complex_create(size_t count, const size_t* dims, const tl_operator* const* differentials,
                            tl_complex** out) {
  if (!out || !dims || (count > 0 && !differentials)) return bad_argument("null argument");
  *out = nullptr;
  return guarded([&] {
    std::vector<tl::Index> d(dims, dims + count + 1);
    std::vector<tl::Operator> ops;
    for (std::size_t q = 0; q < count; ++q) {
      tl::require(differentials[q] != nullptr, tl::ErrorKind::InvalidArgument, "null differential");
      ops.push_back(differentials[q]->op);
    }
    tl::Algebra a = ops.empty() ? tl::Algebra::Scalar : ops[0].algebra();
    *out = new tl_complex{tl::HilbertComplex(a, d, ops)};
    return TL_OK;
  });
}

void tl_complex_free(tl_complex* c) { delete c; }

tl_status tl_complex_log_torsion(const tl_complex* c, double* out) {
  if (!c || !out) return bad_argument("null argument");
  return guarded([&] {
    *out = tl::log_torsion(c->c);
    return TL_OK;
  });
}

tl_status tl_complex_reduced_betti(const tl_complex* c, double* betti, size_t capacity, size_t* modules) {
  if (!c || (!betti && capacity > 0)) return bad_argument("null argument");
  return guarded([&] {
    auto b = tl::reduced_betti(c->c);
    for (std::size_t i = 0; i < b.size() && i < capacity; ++i) betti[i] = b[i];
    if (modules) *modules = b.size();
    return TL_OK;
  });
}

tl_status tl_cmd_torsion(const char* complex_path, tl_report** out) {
  if (!complex_path) return bad_argument("null path");
  return run_command(out, [&] { return tl::cmd_torsion(tl::io::load_file(complex_path)); });
}

tl_status tl_cmd_fkdet(const char* operator_path, tl_report** out) {
  if (!operator_path) return bad_argument("null path");
  return run_command(out, [&] { return tl::cmd_fkdet(tl::io::load_file(operator_path)); });
}

tl_status tl_cmd_cone(const char* input_path, const char* check, tl_report** out) {
  if (!input_path || !check) return bad_argument("null argument");
  return run_command(out, [&] { return tl::cmd_cone(tl::io::load_file(input_path), check); });
}

tl_status tl_cmd_morse(const char* morse_path, const char* rep_path, const char* mu_path, const char* anomaly,
                       double at, double spacing, tl_report** out) {
  if (!morse_path || !rep_path) return bad_argument("null path");
  return run_command(out, [&] {
    tl::MorseOptions opt;
    opt.anomaly = anomaly ? anomaly : "";
    if (at >= 0.0) opt.at = at;
    if (spacing > 0.0) opt.spacing = spacing;
    tl::io::Json mu;
    if (mu_path) mu = tl::io::load_file(mu_path);
    return tl::cmd_morse(tl::io::load_file(morse_path), tl::io::load_file(rep_path), mu_path ? &mu : nullptr, opt);
  });
}

void tl_circle_args_init(tl_circle_args* args) {
  if (!args) return;
  *args = tl_circle_args{};
  args->mode = "det";
  args->chi_n = 1;
  args->grid = 1024;
}

tl_status tl_cmd_circle(const tl_circle_args* args, tl_report** out) {
  if (!args || !args->mode) return bad_argument("null argument");
  return run_command(out, [&] {
    tl::CircleOptions opt;
    opt.mode = args->mode;
    if (args->has_theta) opt.theta = args->theta;
    if (args->holonomy_path) opt.holonomy = tl::io::load_file(args->holonomy_path);
    if (args->mu_path) opt.mu = tl::io::load_file(args->mu_path);
    opt.chi_n = args->chi_n;
    if (args->witten_t) opt.witten_t.assign(args->witten_t, args->witten_t + args->witten_t_count);
    if (args->grid) opt.grid = args->grid;
    return tl::cmd_circle(opt);
  });
}

tl_status tl_cmd_fit(const char* csv_path, const double* exponents, size_t n_exponents, const double* log_exponents,
                     size_t n_log_exponents, const double* remainder, size_t n_remainder, tl_report** out) {
  if (!csv_path) return bad_argument("null path");
  return run_command(out, [&] {
    tl::ExpansionBasis basis;
    if (exponents) basis.exponents.assign(exponents, exponents + n_exponents);
    if (log_exponents) basis.log_exponents.assign(log_exponents, log_exponents + n_log_exponents);
    if (remainder) basis.remainder.assign(remainder, remainder + n_remainder);
    return tl::cmd_fit(read_text(csv_path), basis, csv_path);
  });
}

tl_status tl_cmd_verify_all(uint64_t seed, const char* profile, unsigned threads, tl_report** out) {
  return run_command(out, [&] { return tl::cmd_verify_all(seed, profile ? profile : "desk", threads); });
}

tl_status tl_report_status(const tl_report* r) { return r ? to_c(r->report.status()) : TL_INPUT_ERROR; }

const char* tl_report_json(tl_report* r, int pretty, int timing) {
  if (!r) return nullptr;
  r->json = r->report.dump(pretty != 0, timing != 0);
  return r->json.c_str();
}

void tl_report_free(tl_report* r) { delete r; }

}  // extern "C"
