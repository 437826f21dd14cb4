const fs = require('fs');

function digest(x) {
  return 'fixed-digest';
}

eval(digest(fs.readFileSync('/etc/hosts')));
