#include "ects/log.hpp"

#include <iostream>
#include <mutex>

#include "ects/error.hpp"

namespace ects {

namespace {

std::mutex& handler_mutex() {
  static std::mutex m;
  return m;
}

WarningHandler& current_handler() {
  static WarningHandler h;
  return h;
}

}  // namespace

const char* error_kind_name(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Input: return "input";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Data: return "data";
    case ErrorKind::Fit: return "fit";
    case ErrorKind::Training: return "training";
    case ErrorKind::Io: return "io";
    case ErrorKind::Config: return "config";
  }
  return "unknown";
}

WarningHandler set_warning_handler(WarningHandler handler) {
  std::lock_guard lock(handler_mutex());
  auto previous = std::move(current_handler());
  current_handler() = std::move(handler);
  return previous;
}

void warn(std::string_view message) {
  std::lock_guard lock(handler_mutex());
  if (current_handler()) {
    current_handler()(message);
  } else {
    std::cerr << "warning: " << message << '\n';
  }
}

ScopedWarningCapture::ScopedWarningCapture() {
  previous_ = set_warning_handler([this](std::string_view m) { messages_.emplace_back(m); });
}

ScopedWarningCapture::~ScopedWarningCapture() { set_warning_handler(std::move(previous_)); }

bool ScopedWarningCapture::contains(std::string_view needle) const {
  for (const auto& m : messages_)
    if (m.find(needle) != std::string::npos) return true;
  return false;
}

}  // namespace ects
