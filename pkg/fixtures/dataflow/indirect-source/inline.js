const fs = require('fs');

function load() {
  return fs.readFileSync('/etc/passwd');
}

const text = load();
eval(text);
