#include "store.hpp"

#include <sqlite3.h>

#include "elicit/common.hpp"

namespace elicit::server {

namespace {

struct Statement {
  sqlite3_stmt* stmt = nullptr;
  ~Statement() { sqlite3_finalize(stmt); }
};

}  // namespace

ProjectStore::ProjectStore(const std::string& path) : path_(path) {
  if (sqlite3_open(path.c_str(), &db_) != SQLITE_OK) {
    std::string msg = db_ ? sqlite3_errmsg(db_) : "out of memory";
    sqlite3_close(db_);
    db_ = nullptr;
    throw Error(ErrorCode::Storage, "cannot open " + path + ": " + msg);
  }
  exec("PRAGMA journal_mode=WAL");
  exec("CREATE TABLE IF NOT EXISTS state (key TEXT PRIMARY KEY, doc TEXT NOT NULL)");
}

ProjectStore::~ProjectStore() { sqlite3_close(db_); }

void ProjectStore::exec(const char* sql) {
  char* err = nullptr;
  if (sqlite3_exec(db_, sql, nullptr, nullptr, &err) != SQLITE_OK) {
    std::string msg = err ? err : "unknown error";
    sqlite3_free(err);
    throw Error(ErrorCode::Storage, path_ + ": " + msg);
  }
}

std::optional<std::string> ProjectStore::get(const std::string& key) const {
  Statement s;
  if (sqlite3_prepare_v2(db_, "SELECT doc FROM state WHERE key = ?", -1, &s.stmt, nullptr) != SQLITE_OK) {
    throw Error(ErrorCode::Storage, path_ + ": " + sqlite3_errmsg(db_));
  }
  sqlite3_bind_text(s.stmt, 1, key.data(), static_cast<int>(key.size()), SQLITE_TRANSIENT);
  if (sqlite3_step(s.stmt) != SQLITE_ROW) return std::nullopt;
  const auto* text = reinterpret_cast<const char*>(sqlite3_column_text(s.stmt, 0));
  return std::string(text, static_cast<std::size_t>(sqlite3_column_bytes(s.stmt, 0)));
}

void ProjectStore::put(const std::vector<std::pair<std::string, std::string>>& docs) {
  exec("BEGIN IMMEDIATE");
  try {
    Statement s;
    if (sqlite3_prepare_v2(db_, "INSERT OR REPLACE INTO state (key, doc) VALUES (?, ?)", -1, &s.stmt,
                           nullptr) != SQLITE_OK) {
      throw Error(ErrorCode::Storage, path_ + ": " + sqlite3_errmsg(db_));
    }
    for (const auto& [key, doc] : docs) {
      sqlite3_reset(s.stmt);
      sqlite3_bind_text(s.stmt, 1, key.data(), static_cast<int>(key.size()), SQLITE_TRANSIENT);
      sqlite3_bind_text(s.stmt, 2, doc.data(), static_cast<int>(doc.size()), SQLITE_TRANSIENT);
      if (sqlite3_step(s.stmt) != SQLITE_DONE) {
        throw Error(ErrorCode::Storage, path_ + ": " + sqlite3_errmsg(db_));
      }
    }
    exec("COMMIT");
  } catch (...) {
    sqlite3_exec(db_, "ROLLBACK", nullptr, nullptr, nullptr);
    throw;
  }
}

}  // namespace elicit::server
